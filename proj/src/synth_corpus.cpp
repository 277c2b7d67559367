// Copyright 2026 The GraphMoco Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic pseudo-assembly corpus generator.
//
// Every source function is an abstract template: a CFG whose blocks hold
// architecture-neutral instructions over virtual registers. A variant renders
// the template through one of six pseudo-architectures (x86/arm/mips, 32/64
// bit), each with its own mnemonics, registers, literal syntax and calling
// convention, then applies perturbations that keep the template semantics:
// register renaming, nop padding, spill/reload pairs, block splitting,
// literal re-spelling and mnemonic synonyms.

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>

#include "graphmoco/corpus.hpp"
#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

enum class Sem {
  kMovRR, kMovRI, kLoad, kStore, kAdd, kAddI, kSub, kMul,
  kAnd, kOr, kXor, kShl, kCmp, kCmpI, kCall, kPrologue, kEpilogue,
};
inline constexpr int kNumBodySems = 14;  // kMovRR .. kCall
inline constexpr int kVirtualRegs = 6;

struct AbstractIns {
  Sem sem = Sem::kMovRR;
  int a = 0;
  int b = 0;
  long imm = 0;
  int callee = 0;
};

struct AbstractBlock {
  std::vector<AbstractIns> body;
  int fallthrough = -1;  // successor without an explicit jump
  int branch = -1;       // successor reached through a jump
  int cond = 0;          // 0..3 = eq, ne, lt, ge
};

struct Template {
  std::vector<AbstractBlock> blocks;
};

int Uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool Chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

Template MakeTemplate(Rng& rng) {
  Template t;
  const int n = Uniform(rng, 3, 15);
  t.blocks.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AbstractBlock& blk = t.blocks[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      if (Chance(rng, 0.75)) blk.fallthrough = i + 1;
      if (Chance(rng, 0.5) || blk.fallthrough < 0) {
        int target = Uniform(rng, 0, n - 1);
        if (target == i + 1 && blk.fallthrough == i + 1) target = n - 1;
        blk.branch = target;
        blk.cond = Uniform(rng, 0, 3);
      }
    }
    const bool has_terminator = blk.branch >= 0 || blk.fallthrough < 0;
    const int total = Uniform(rng, 2, 20);
    int body = total - (has_terminator ? 1 : 0);
    if (i == 0) {
      blk.body.push_back({Sem::kPrologue});
      --body;
    }
    const bool is_exit = blk.fallthrough < 0 && blk.branch < 0;
    if (is_exit) --body;  // room for the epilogue
    for (int k = 0; k < body; ++k) {
      AbstractIns ins;
      ins.sem = static_cast<Sem>(Uniform(rng, 0, kNumBodySems - 1));
      ins.a = Uniform(rng, 0, kVirtualRegs - 1);
      ins.b = Uniform(rng, 0, kVirtualRegs - 1);
      if (ins.sem == Sem::kShl) {
        ins.imm = Uniform(rng, 1, 5);
      } else if (ins.sem == Sem::kLoad || ins.sem == Sem::kStore) {
        ins.imm = 4 * Uniform(rng, 1, 8);
      } else {
        ins.imm = Uniform(rng, 1, 64);
      }
      ins.callee = Uniform(rng, 0, 63);
      blk.body.push_back(ins);
    }
    if (is_exit) blk.body.push_back({Sem::kEpilogue});
  }
  return t;
}

// Splits up to kSynthMaxBlockSplits blocks in place. The first half keeps the
// block position and falls through into the second half, which inherits the
// original successors.
void SplitBlocks(Template& t, Rng& rng) {
  for (int s = 0; s < kSynthMaxBlockSplits; ++s) {
    if (!Chance(rng, 0.5)) continue;
    std::vector<int> candidates;
    for (std::size_t i = 0; i < t.blocks.size(); ++i) {
      if (t.blocks[i].body.size() >= 4) candidates.push_back(static_cast<int>(i));
    }
    if (candidates.empty()) return;
    const int victim =
        candidates[static_cast<std::size_t>(Uniform(rng, 0, static_cast<int>(candidates.size()) - 1))];
    for (AbstractBlock& blk : t.blocks) {
      if (blk.fallthrough > victim) ++blk.fallthrough;
      if (blk.branch > victim) ++blk.branch;
    }
    AbstractBlock& first = t.blocks[static_cast<std::size_t>(victim)];
    const int cut = Uniform(rng, 2, static_cast<int>(first.body.size()) - 2);
    AbstractBlock second;
    second.body.assign(first.body.begin() + cut, first.body.end());
    second.fallthrough = first.fallthrough;
    second.branch = first.branch;
    second.cond = first.cond;
    first.body.resize(static_cast<std::size_t>(cut));
    first.fallthrough = victim + 1;
    first.branch = -1;
    t.blocks.insert(t.blocks.begin() + victim + 1, std::move(second));
  }
}

struct VariantConfig {
  Arch arch = Arch::kX86;
  int bits = 64;
  int compiler = 0;  // 0 = gcc, 1 = clang
  int version = 0;
  OptLevel opt = OptLevel::kO0;
};

const char* kCompilers[2] = {"gcc", "clang"};
const char* kVersions[2][2] = {{"7.5", "9.4"}, {"9.0", "12.0"}};

// Rendering state for one variant.
class Renderer {
 public:
  Renderer(const VariantConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {
    std::vector<std::string> pool = RegisterPool();
    std::shuffle(pool.begin(), pool.end(), rng_);
    regs_.assign(pool.begin(), pool.begin() + kVirtualRegs);
    base_ = 0x400000 + 0x10 * Uniform(rng_, 0, 0xffff);
    synonym_bias_ = cfg.compiler == 1 ? 0.7 : 0.3;
    switch (cfg.opt) {
      case OptLevel::kO0: nop_p_ = 0.02; spill_p_ = 0.35; break;
      case OptLevel::kO1: nop_p_ = 0.04; spill_p_ = 0.12; break;
      case OptLevel::kO2: nop_p_ = 0.10; spill_p_ = 0.05; break;
      case OptLevel::kO3: nop_p_ = 0.15; spill_p_ = 0.03; break;
      case OptLevel::kOs: nop_p_ = 0.0; spill_p_ = 0.05; break;
    }
  }

  std::vector<RawInstruction> RenderBody(const AbstractIns& ins) {
    std::vector<RawInstruction> out;
    Emit(ins, out);
    if (Writes(ins.sem) && Chance(rng_, spill_p_)) {
      const long slot = 4 * Uniform(rng_, 3, 10);
      Emit({Sem::kStore, ins.a, ins.a, slot, 0}, out);
      Emit({Sem::kLoad, ins.a, ins.a, slot, 0}, out);
    }
    if (Chance(rng_, nop_p_)) out.push_back(Nop());
    return out;
  }

  std::vector<RawInstruction> RenderTerminator(const AbstractBlock& blk) {
    std::vector<RawInstruction> out;
    if (blk.branch >= 0) {
      const bool conditional = blk.fallthrough >= 0;
      out.push_back(Jump(conditional, blk.cond, blk.branch));
      if (cfg_.arch == Arch::kMips) out.push_back(Nop());  // delay slot
    } else if (blk.fallthrough < 0) {
      for (auto& ins : Ret()) out.push_back(std::move(ins));
    }
    return out;
  }

 private:
  static bool Writes(Sem s) {
    return s != Sem::kStore && s != Sem::kCmp && s != Sem::kCmpI &&
           s != Sem::kCall && s != Sem::kPrologue && s != Sem::kEpilogue;
  }

  std::vector<std::string> RegisterPool() const {
    std::vector<std::string> pool;
    switch (cfg_.arch) {
      case Arch::kX86:
        if (cfg_.bits == 32) {
          pool = {"eax", "ebx", "ecx", "edx", "esi", "edi"};
        } else {
          pool = {"rax", "rbx", "rcx", "rdx", "rsi", "rdi",
                  "r8",  "r9",  "r10", "r11", "r12", "r13"};
        }
        break;
      case Arch::kArm:
        for (int i = 0; i <= (cfg_.bits == 32 ? 10 : 15); ++i) {
          pool.push_back((cfg_.bits == 32 ? "r" : "x") + std::to_string(i));
        }
        break;
      case Arch::kMips:
        for (int i = 0; i < 8; ++i) pool.push_back("$t" + std::to_string(i));
        for (int i = 0; i < 4; ++i) pool.push_back("$s" + std::to_string(i));
        break;
    }
    return pool;
  }

  bool Syn() { return Chance(rng_, synonym_bias_); }

  std::string Imm(long v) {
    const bool hex = Chance(rng_, 0.5);
    char buf[32];
    if (hex) {
      std::snprintf(buf, sizeof(buf), "%s0x%lx", v < 0 ? "-" : "",
                    static_cast<unsigned long>(v < 0 ? -v : v));
    } else {
      std::snprintf(buf, sizeof(buf), "%ld", v);
    }
    return cfg_.arch == Arch::kArm ? std::string("#") + buf : std::string(buf);
  }

  std::string Addr(long address) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%lx", static_cast<unsigned long>(address));
    return buf;
  }

  std::string Mem(long offset) {
    switch (cfg_.arch) {
      case Arch::kX86:
        return std::string("[") + (cfg_.bits == 32 ? "ebp" : "rbp") + "-" +
               Imm(offset) + "]";
      case Arch::kArm:
        return cfg_.bits == 32 ? "[fp," + Imm(-offset) + "]"
                               : "[x29," + Imm(2 * offset) + "]";
      case Arch::kMips:
        return Imm(cfg_.bits == 32 ? -offset : -2 * offset) + "($fp)";
    }
    return "";
  }

  // Mnemonic of a two-operand ALU op; x86 gets an AT&T-style width suffix,
  // mips64 the doubleword form.
  std::string Alu(const char* x86, const char* arm, const char* mips32,
                  const char* mips64) const {
    switch (cfg_.arch) {
      case Arch::kX86: return std::string(x86) + (cfg_.bits == 32 ? "l" : "q");
      case Arch::kArm: return arm;
      case Arch::kMips: return cfg_.bits == 32 ? mips32 : mips64;
    }
    return "";
  }

  RawInstruction Ins(std::vector<std::string> tokens) {
    RawInstruction r;
    r.tokens = std::move(tokens);
    return r;
  }

  RawInstruction Nop() {
    if (cfg_.arch == Arch::kX86 && cfg_.bits == 64 && Syn()) {
      return Ins({"nopw", "[rax+rax+0x0]"});
    }
    if (cfg_.arch == Arch::kArm && cfg_.bits == 32 && Syn()) {
      return Ins({"mov", "r0", "r0"});
    }
    return Ins({"nop"});
  }

  RawInstruction Jump(bool conditional, int cond, int target_block) {
    const std::string target = Addr(base_ + 0x40L * target_block);
    RawInstruction r;
    static const char* kX86[4][2] = {
        {"je", "jz"}, {"jne", "jnz"}, {"jl", "jnge"}, {"jge", "jnl"}};
    static const char* kArm32[4] = {"beq", "bne", "blt", "bge"};
    static const char* kArm64[4] = {"b.eq", "b.ne", "b.lt", "b.ge"};
    if (!conditional) {
      switch (cfg_.arch) {
        case Arch::kX86: r = Ins({"jmp", target}); break;
        case Arch::kArm: r = Ins({"b", target}); break;
        case Arch::kMips: r = Ins({Syn() ? "j" : "b", target}); break;
      }
    } else {
      switch (cfg_.arch) {
        case Arch::kX86: r = Ins({kX86[cond][Syn() ? 1 : 0], target}); break;
        case Arch::kArm:
          r = Ins({cfg_.bits == 32 ? kArm32[cond] : kArm64[cond], target});
          break;
        case Arch::kMips:
          if (Syn()) {
            r = Ins({cond % 2 == 0 ? "beq" : "bne", "$at", "$zero", target});
          } else {
            r = Ins({cond % 2 == 0 ? "beqz" : "bnez", "$at", target});
          }
          break;
      }
    }
    r.addr_tags = AddressTags{{static_cast<int>(r.tokens.size()) - 1}, {}};
    return r;
  }

  std::vector<RawInstruction> Ret() {
    std::vector<RawInstruction> out;
    switch (cfg_.arch) {
      case Arch::kX86: out.push_back(Ins({cfg_.bits == 32 ? "ret" : "retq"})); break;
      case Arch::kArm:
        out.push_back(cfg_.bits == 32 ? Ins({"bx", "lr"}) : Ins({"ret"}));
        break;
      case Arch::kMips:
        out.push_back(Ins({"jr", "$ra"}));
        out.push_back(Ins({"nop"}));
        break;
    }
    return out;
  }

  void Emit(const AbstractIns& ins, std::vector<RawInstruction>& out) {
    const std::string& a = regs_[static_cast<std::size_t>(ins.a)];
    const std::string& b = regs_[static_cast<std::size_t>(ins.b)];
    const bool x86 = cfg_.arch == Arch::kX86;
    const bool arm = cfg_.arch == Arch::kArm;
    const bool mips = cfg_.arch == Arch::kMips;
    const bool w32 = cfg_.bits == 32;
    // Three-address form for arm/mips ALU ops, two-address for x86.
    auto alu = [&](const std::string& op, const std::string& src) {
      if (x86) return Ins({op, a, src});
      return Ins({op, a, a, src});
    };
    switch (ins.sem) {
      case Sem::kMovRR:
        if (x86) out.push_back(Ins({Alu("mov", "", "", ""), a, b}));
        else if (arm) out.push_back(Ins({w32 && Syn() ? "cpy" : "mov", a, b}));
        else if (Syn()) out.push_back(Ins({w32 ? "or" : "daddu", a, b, "$zero"}));
        else out.push_back(Ins({"move", a, b}));
        break;
      case Sem::kMovRI:
        if (x86) out.push_back(Ins({Alu("mov", "", "", ""), a, Imm(ins.imm)}));
        else if (arm) out.push_back(Ins({Syn() ? (w32 ? "movw" : "movz") : "mov", a, Imm(ins.imm)}));
        else if (Syn()) out.push_back(Ins({w32 ? "addiu" : "daddiu", a, "$zero", Imm(ins.imm)}));
        else out.push_back(Ins({"li", a, Imm(ins.imm)}));
        break;
      case Sem::kLoad:
        if (x86) out.push_back(Ins({Alu("mov", "", "", ""), a, Mem(ins.imm)}));
        else if (arm) out.push_back(Ins({"ldr", a, Mem(ins.imm)}));
        else out.push_back(Ins({w32 ? "lw" : "ld", a, Mem(ins.imm)}));
        break;
      case Sem::kStore:
        if (x86) out.push_back(Ins({Alu("mov", "", "", ""), Mem(ins.imm), a}));
        else if (arm) out.push_back(Ins({"str", a, Mem(ins.imm)}));
        else out.push_back(Ins({w32 ? "sw" : "sd", a, Mem(ins.imm)}));
        break;
      case Sem::kAdd:
        out.push_back(alu(Alu("add", "add", "addu", "daddu"), b));
        break;
      case Sem::kAddI:
        if (Syn()) {
          if (x86) out.push_back(Ins({Alu("lea", "", "", ""), a,
                                      "[" + a + "+" + Imm(ins.imm) + "]"}));
          else out.push_back(alu(Alu("sub", "sub", "addiu", "daddiu"),
                                 Imm(mips ? ins.imm : -ins.imm)));
        } else {
          out.push_back(alu(Alu("add", "add", "addiu", "daddiu"), Imm(ins.imm)));
        }
        break;
      case Sem::kSub:
        out.push_back(alu(Alu("sub", "sub", "subu", "dsubu"), b));
        break;
      case Sem::kMul:
        out.push_back(alu(Alu("imul", "mul", "mul", "dmul"), b));
        break;
      case Sem::kAnd:
        out.push_back(alu(Alu("and", "and", "and", "and"), b));
        break;
      case Sem::kOr:
        out.push_back(alu(Alu("or", "orr", "or", "or"), b));
        break;
      case Sem::kXor:
        out.push_back(alu(Alu("xor", "eor", "xor", "xor"), b));
        break;
      case Sem::kShl:
        if (x86 && Syn()) out.push_back(alu(Alu("sal", "", "", ""), Imm(ins.imm)));
        else out.push_back(alu(Alu("shl", "lsl", "sll", "dsll"), Imm(ins.imm)));
        break;
      case Sem::kCmp:
        if (mips) out.push_back(Ins({"slt", "$at", a, b}));
        else out.push_back(Ins({x86 ? Alu("cmp", "", "", "") : "cmp", a, b}));
        break;
      case Sem::kCmpI:
        if (mips) out.push_back(Ins({Syn() ? "sltiu" : "slti", "$at", a, Imm(ins.imm)}));
        else if (arm && Syn()) out.push_back(Ins({"cmn", a, Imm(-ins.imm)}));
        else out.push_back(Ins({x86 ? Alu("cmp", "", "", "") : "cmp", a, Imm(ins.imm)}));
        break;
      case Sem::kCall: {
        RawInstruction call;
        const std::string target = Addr(0x800000 + 0x100L * ins.callee +
                                        (base_ & 0xff000));
        if (x86 && w32) {
          out.push_back(Ins({"pushl", a}));
          call = Ins({"call", target});
        } else if (x86) {
          out.push_back(Ins({"movq", "rdi", a}));
          call = Ins({"callq", target});
        } else if (arm) {
          out.push_back(Ins({"mov", w32 ? "r0" : "x0", a}));
          call = Ins({"bl", target});
        } else {
          out.push_back(Ins({"move", "$a0", a}));
          call = Ins({"jal", target});
        }
        call.addr_tags = AddressTags{{}, {1}};
        out.push_back(std::move(call));
        if (mips) out.push_back(Ins({"nop"}));
        if (x86 && w32) out.push_back(Ins({"addl", "esp", Imm(4)}));
        break;
      }
      case Sem::kPrologue:
        if (x86) {
          out.push_back(Ins({w32 ? "pushl" : "pushq", w32 ? "ebp" : "rbp"}));
          out.push_back(Ins({w32 ? "movl" : "movq", w32 ? "ebp" : "rbp",
                             w32 ? "esp" : "rsp"}));
        } else if (arm && w32) {
          if (Syn()) out.push_back(Ins({"stmdb", "sp!", "{r4,r5,fp,lr}"}));
          else out.push_back(Ins({"push", "{", "r4", "r5", "fp", "lr", "}"}));
          out.push_back(Ins({"add", "fp", "sp", Imm(8)}));
        } else if (arm) {
          out.push_back(Ins({"stp", "x29", "x30", "[sp," + Imm(-32) + "]!"}));
          out.push_back(Ins({"mov", "x29", "sp"}));
        } else {
          out.push_back(Ins({w32 ? "addiu" : "daddiu", "$sp", "$sp", Imm(-32)}));
          out.push_back(Ins({w32 ? "sw" : "sd", "$ra", Imm(28) + "($sp)"}));
        }
        break;
      case Sem::kEpilogue:
        if (x86) {
          if (Syn()) out.push_back(Ins({"leave"}));
          else out.push_back(Ins({w32 ? "popl" : "popq", w32 ? "ebp" : "rbp"}));
        } else if (arm && w32) {
          if (Syn()) out.push_back(Ins({"ldmia", "sp!", "{r4,r5,fp,lr}"}));
          else out.push_back(Ins({"pop", "{", "r4", "r5", "fp", "lr", "}"}));
        } else if (arm) {
          out.push_back(Ins({"ldp", "x29", "x30", "[sp]," + Imm(32)}));
        } else {
          out.push_back(Ins({w32 ? "lw" : "ld", "$ra", Imm(28) + "($sp)"}));
          out.push_back(Ins({w32 ? "addiu" : "daddiu", "$sp", "$sp", Imm(32)}));
        }
        break;
    }
  }

  VariantConfig cfg_;
  Rng& rng_;
  std::vector<std::string> regs_;
  long base_ = 0;
  double synonym_bias_ = 0.5;
  double nop_p_ = 0.0;
  double spill_p_ = 0.0;
};

FunctionVariant RenderVariant(const std::string& function_id,
                              const Template& tmpl, const VariantConfig& cfg,
                              Rng& rng) {
  Template t = tmpl;
  SplitBlocks(t, rng);
  Renderer renderer(cfg, rng);

  FunctionVariant v;
  v.meta.function_id = function_id;
  v.meta.arch = cfg.arch;
  v.meta.bitness = cfg.bits;
  v.meta.compiler = kCompilers[cfg.compiler];
  v.meta.compiler_version = kVersions[cfg.compiler][cfg.version];
  v.meta.opt_level = cfg.opt;
  for (std::size_t i = 0; i < t.blocks.size(); ++i) {
    const AbstractBlock& blk = t.blocks[i];
    BasicBlock out;
    for (const AbstractIns& ins : blk.body) {
      for (auto& r : renderer.RenderBody(ins)) {
        out.instructions.push_back(std::move(r));
      }
    }
    for (auto& r : renderer.RenderTerminator(blk)) {
      out.instructions.push_back(std::move(r));
    }
    v.acfg.blocks.push_back(std::move(out));
    const int src = static_cast<int>(i);
    if (blk.fallthrough >= 0) v.acfg.edges.emplace_back(src, blk.fallthrough);
    if (blk.branch >= 0) v.acfg.edges.emplace_back(src, blk.branch);
  }
  return v;
}

}  // namespace

Corpus SynthCorpus(int n_functions, int variants_per_function,
                   std::uint64_t seed) {
  Require(n_functions >= 1, "synth needs at least one function");
  Require(variants_per_function >= 1, "synth needs at least one variant");
  Require(variants_per_function <= kSynthMaxVariants,
          "synth supports at most " + std::to_string(kSynthMaxVariants) +
              " variants per function");
  const int width = static_cast<int>(std::to_string(n_functions - 1).size());
  std::vector<FunctionVariant> variants;
  variants.reserve(static_cast<std::size_t>(n_functions) *
                   static_cast<std::size_t>(variants_per_function));
  for (int f = 0; f < n_functions; ++f) {
    std::seed_seq template_seed{static_cast<std::uint32_t>(seed),
                                static_cast<std::uint32_t>(seed >> 32),
                                static_cast<std::uint32_t>(f), 0xC0DEu};
    Rng rng(template_seed);
    const Template tmpl = MakeTemplate(rng);

    // Spread variants across the six arch/bitness targets first, then walk
    // the 20 compiler/version/opt settings with stride 7 (coprime with 20) so
    // every (target, setting) pair is distinct for up to 120 variants.
    std::array<int, 6> targets;
    std::iota(targets.begin(), targets.end(), 0);
    std::shuffle(targets.begin(), targets.end(), rng);
    std::array<int, 20> settings;
    std::iota(settings.begin(), settings.end(), 0);
    std::shuffle(settings.begin(), settings.end(), rng);

    char name[32];
    std::snprintf(name, sizeof(name), "fn_%0*d", width, f);
    for (int v = 0; v < variants_per_function; ++v) {
      const int target = targets[static_cast<std::size_t>(v % 6)];
      const int setting =
          settings[static_cast<std::size_t>((v % 6 + 7 * (v / 6)) % 20)];
      VariantConfig cfg;
      cfg.arch = static_cast<Arch>(target / 2);
      cfg.bits = target % 2 == 0 ? 32 : 64;
      cfg.compiler = setting / 10;
      cfg.version = (setting / 5) % 2;
      cfg.opt = static_cast<OptLevel>(setting % 5);
      std::seed_seq variant_seed{static_cast<std::uint32_t>(seed),
                                 static_cast<std::uint32_t>(seed >> 32),
                                 static_cast<std::uint32_t>(f),
                                 static_cast<std::uint32_t>(v) + 1u};
      Rng vrng(variant_seed);
      variants.push_back(RenderVariant(name, tmpl, cfg, vrng));
    }
  }
  return Corpus(std::move(variants));
}

}  // namespace graphmoco
