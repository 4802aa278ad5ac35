#include "dwc/rtl.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

#include "dwc/errors.hpp"

namespace dwc {

// ---------------------------------------------------------------- emission

int output_word_width(const CompiledCircuit& circuit) {
  int w = 2;
  for (std::int32_t v : circuit.sram) {
    while (w < 32) {
      const std::int64_t lo = -(std::int64_t{1} << (w - 1));
      const std::int64_t hi = (std::int64_t{1} << (w - 1)) - 1;
      if (v >= lo && v <= hi) break;
      ++w;
    }
  }
  return w;
}

namespace {

std::string hex_literal(int width, std::uint64_t value) {
  std::ostringstream os;
  const int digits = std::max(1, (width + 3) / 4);
  os << width << "'h" << std::hex;
  for (int d = digits - 1; d >= 0; --d) os << ((value >> (4 * d)) & 0xF);
  return os.str();
}

std::string range(int width) { return "[" + std::to_string(width - 1) + ":0]"; }

struct Operand {
  std::string expr;
  int width;
};

}  // namespace

std::string emit_rtl(const CompiledCircuit& c, int stages, const std::string& module_name) {
  c.check();
  if (stages < 0 || stages > kMaxPipelineStages) {
    throw ConfigError("pipeline stages must be 0, 1 or 2, got " + std::to_string(stages));
  }
  if (stages > 0 && c.layers.size() < 2) {
    throw ConfigError("pipeline stage " + std::to_string(stages) +
                      " needs a cut between two LUT layers; the circuit has one layer");
  }
  const int ow = output_word_width(c);
  const std::uint64_t omask = (std::uint64_t{1} << ow) - 1;
  std::ostringstream v;

  v << "// weightless controller: " << c.obs_dim << " inputs x " << c.bits << " bits, "
    << c.layers.size() << " LUT layers, " << c.act_dim << " actions, " << stages
    << " pipeline stages, latency " << rtl_latency(stages) << "\n";
  v << "module " << module_name << " (\n";
  v << "  input wire clk,\n";
  v << "  input wire " << range(c.input_bits()) << " x";
  for (int d = 0; d < c.act_dim; ++d) {
    v << ",\n  output wire signed " << range(ow) << " y" << d;
  }
  v << "\n);\n";

  std::string source = "x";
  std::vector<std::string> clocked;
  for (std::size_t n = 0; n < c.layers.size(); ++n) {
    const auto& l = c.layers[n];
    const std::string net = "l" + std::to_string(n + 1);
    const int tbits = 1 << l.arity;
    v << "\n  wire " << range(l.width) << " " << net << ";\n";
    for (int i = 0; i < l.width; ++i) {
      v << "  assign " << net << "[" << i << "] = " << hex_literal(tbits, l.tables[static_cast<std::size_t>(i)])
        << " >> {";
      for (int j = l.arity - 1; j >= 0; --j) {
        v << source << "[" << l.selection[static_cast<std::size_t>(i * l.arity + j)] << "]"
          << (j > 0 ? ", " : "");
      }
      v << "};\n";
    }
    source = net;
    if (n == 0 && stages >= 1) {
      v << "  reg " << range(l.width) << " r1;\n";
      clocked.push_back("r1 <= " + net + ";");
      source = "r1";
    }
  }
  if (stages >= 2) {
    v << "  reg " << range(c.final_width()) << " r2;\n";
    clocked.push_back("r2 <= " + source + ";");
    source = "r2";
  }

  for (int d = 0; d < c.act_dim; ++d) {
    v << "\n  // action " << d << ": popcount tree and action ROM\n";
    std::vector<Operand> level;
    for (int i = 0; i < c.group_size; ++i) {
      level.push_back({source + "[" + std::to_string(d * c.group_size + i) + "]", 1});
    }
    for (int depth = 0; level.size() > 1; ++depth) {
      std::vector<Operand> next;
      for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
        const int w = std::max(level[i].width, level[i + 1].width) + 1;
        const std::string name =
            "pc" + std::to_string(d) + "_" + std::to_string(depth) + "_" + std::to_string(i / 2);
        v << "  wire " << range(w) << " " << name << ";\n";
        v << "  assign " << name << " = " << level[i].expr << " + " << level[i + 1].expr << ";\n";
        next.push_back({name, w});
      }
      if (level.size() % 2 == 1) next.push_back(level.back());
      level = std::move(next);
    }
    const std::string rom = "rom" + std::to_string(d);
    const std::string q = "q" + std::to_string(d);
    v << "  reg " << range(ow) << " " << rom << " [0:" << c.group_size << "];\n";
    v << "  reg " << range(ow) << " " << q << ";\n";
    v << "  initial begin\n";
    const auto table = c.action_table(d);
    for (std::size_t s = 0; s < table.size(); ++s) {
      v << "    " << rom << "[" << s << "] = "
        << hex_literal(ow, static_cast<std::uint64_t>(static_cast<std::int64_t>(table[s])) & omask)
        << ";\n";
    }
    v << "  end\n";
    v << "  assign y" << d << " = " << q << ";\n";
    clocked.push_back(q + " <= " + rom + "[" + level.front().expr + "];");
  }

  v << "\n  always @(posedge clk) begin\n";
  for (const auto& s : clocked) v << "    " << s << "\n";
  v << "  end\nendmodule\n";
  return v.str();
}

// ---------------------------------------------------------------- bit vectors

void BitVec::set_bit(int i, bool v) {
  auto& w = words[static_cast<std::size_t>(i / 64)];
  const std::uint64_t m = std::uint64_t{1} << (i % 64);
  w = v ? (w | m) : (w & ~m);
}

BitVec BitVec::resized(int w) const {
  BitVec out(w);
  const std::size_t n = std::min(out.words.size(), words.size());
  std::copy_n(words.begin(), n, out.words.begin());
  if (w % 64 != 0) out.words.back() &= (std::uint64_t{1} << (w % 64)) - 1;
  return out;
}

namespace {

BitVec from_u64(int width, std::uint64_t v) {
  BitVec b(width);
  b.words[0] = v;
  return b.resized(width);
}

BitVec shift_right(const BitVec& a, std::uint64_t amount) {
  BitVec out(a.width);
  if (amount >= static_cast<std::uint64_t>(a.width)) return out;
  const auto words = static_cast<std::size_t>(amount / 64);
  const int bits = static_cast<int>(amount % 64);
  for (std::size_t i = 0; i + words < a.words.size(); ++i) {
    std::uint64_t v = a.words[i + words] >> bits;
    if (bits > 0 && i + words + 1 < a.words.size()) v |= a.words[i + words + 1] << (64 - bits);
    out.words[i] = v;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- parsing

struct RtlExpr {
  enum Kind { kConst, kNet, kSelect, kConcat, kAdd, kShr } kind = kConst;
  BitVec value;
  int net = -1;
  int const_index = -1;  // kSelect with a literal index
  std::vector<RtlExpr> args;
};

struct RtlNet {
  std::string name;
  int width = 1;
  int depth = 0;  // > 0 for memories
  bool is_signed = false;
  bool is_reg = false;
  enum Dir { kInternal, kInput, kOutput } dir = kInternal;
};

struct RtlAssign {
  int net = -1;
  int index = -1;  // bit for vectors, word for memories, -1 for the whole net
  RtlExpr rhs;
  int line = 0;
};

struct RtlModule {
  std::string name;
  std::vector<RtlNet> nets;
  std::map<std::string, int> by_name;
  std::vector<int> ports;
  std::vector<RtlAssign> comb;  // topologically ordered
  std::vector<RtlAssign> clocked;
  std::vector<RtlAssign> init;
  int clock = -1;
};

namespace {

struct Token {
  enum Kind { kIdent, kNumber, kSymbol, kEnd } kind = kEnd;
  std::string text;
  int line = 0;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError("rtl line " + std::to_string(line) + ": " + what);
  };
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Token::kIdent, src.substr(i, j - i), line});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '\'') {
        ++j;
        if (j < src.size() && (src[j] == 's' || src[j] == 'S')) ++j;
        if (j >= src.size() || std::string("hHdDbB").find(src[j]) == std::string::npos) {
          fail("bad literal base");
        }
        ++j;
        while (j < src.size() && (std::isxdigit(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      }
      out.push_back({Token::kNumber, src.substr(i, j - i), line});
      i = j;
    } else if (ch == '<' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Token::kSymbol, "<=", line});
      i += 2;
    } else if (ch == '>' && i + 1 < src.size() && src[i + 1] == '>') {
      out.push_back({Token::kSymbol, ">>", line});
      i += 2;
    } else if (std::string("()[]{},;:=+@").find(ch) != std::string::npos) {
      out.push_back({Token::kSymbol, std::string(1, ch), line});
      ++i;
    } else {
      fail(std::string("unexpected character '") + ch + "'");
    }
  }
  out.push_back({Token::kEnd, "", line});
  return out;
}

BitVec parse_literal(const std::string& text, int line) {
  auto fail = [&](const std::string& what) {
    throw FormatError("rtl line " + std::to_string(line) + ": " + what);
  };
  const auto q = text.find('\'');
  if (q == std::string::npos) {
    std::uint64_t v = 0;
    for (char ch : text) v = v * 10 + static_cast<std::uint64_t>(ch - '0');
    return from_u64(32, v);
  }
  const int width = std::stoi(text.substr(0, q));
  if (width <= 0 || width > 4096) fail("literal width out of range");
  std::size_t p = q + 1;
  if (text[p] == 's' || text[p] == 'S') ++p;
  const char base = static_cast<char>(std::tolower(static_cast<unsigned char>(text[p++])));
  std::string digits;
  for (; p < text.size(); ++p) {
    if (text[p] != '_') digits += text[p];
  }
  if (digits.empty()) fail("empty literal");
  BitVec out(width);
  if (base == 'h' || base == 'b') {
    const int per = base == 'h' ? 4 : 1;
    int bit = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
      const int d = std::isdigit(static_cast<unsigned char>(*it))
                        ? *it - '0'
                        : std::tolower(static_cast<unsigned char>(*it)) - 'a' + 10;
      if (d >= (1 << per)) fail("digit out of range for base");
      for (int b = 0; b < per; ++b, ++bit) {
        if ((d >> b) & 1) {
          if (bit >= width) fail("literal wider than its size");
          out.set_bit(bit, true);
        }
      }
    }
  } else {
    if (width > 64) fail("decimal literal wider than 64 bits");
    std::uint64_t v = 0;
    for (char ch : digits) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) fail("bad decimal digit");
      v = v * 10 + static_cast<std::uint64_t>(ch - '0');
    }
    out = from_u64(width, v);
  }
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  std::shared_ptr<RtlModule> run() {
    auto m = std::make_shared<RtlModule>();
    mod_ = m.get();
    expect_ident("module");
    mod_->name = ident();
    expect("(");
    if (!accept(")")) {
      do {
        port();
      } while (accept(","));
      expect(")");
    }
    expect(";");
    std::vector<RtlAssign> comb;
    while (!peek_ident("endmodule")) {
      if (peek().kind == Token::kEnd) fail("missing endmodule");
      if (accept_ident("wire")) {
        declare(false);
      } else if (accept_ident("reg")) {
        declare(true);
      } else if (accept_ident("assign")) {
        RtlAssign a = lvalue(false);
        expect("=");
        a.rhs = expr();
        expect(";");
        if (mod_->nets[static_cast<std::size_t>(a.net)].is_reg) fail("assign to reg");
        comb.push_back(std::move(a));
      } else if (accept_ident("always")) {
        always_block();
      } else if (accept_ident("initial")) {
        initial_block();
      } else {
        fail("unsupported statement '" + peek().text + "'");
      }
    }
    expect_ident("endmodule");
    if (peek().kind != Token::kEnd) fail("text after endmodule");
    mod_->comb = order(std::move(comb));
    return m;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  RtlModule* mod_ = nullptr;

  const Token& peek() const { return toks_[pos_]; }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("rtl line " + std::to_string(peek().line) + ": " + what);
  }
  bool accept(const std::string& sym) {
    if (peek().kind == Token::kSymbol && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& sym) {
    if (!accept(sym)) fail("expected '" + sym + "', got '" + peek().text + "'");
  }
  bool peek_ident(const std::string& word) const {
    return peek().kind == Token::kIdent && peek().text == word;
  }
  bool accept_ident(const std::string& word) {
    if (peek_ident(word)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_ident(const std::string& word) {
    if (!accept_ident(word)) fail("expected '" + word + "'");
  }
  std::string ident() {
    if (peek().kind != Token::kIdent) fail("expected identifier");
    return toks_[pos_++].text;
  }
  int integer() {
    if (peek().kind != Token::kNumber) fail("expected number");
    const BitVec v = parse_literal(toks_[pos_].text, peek().line);
    ++pos_;
    if (v.low() > (1u << 30)) fail("number too large");
    return static_cast<int>(v.low());
  }
  int net_index(const std::string& name) const {
    const auto it = mod_->by_name.find(name);
    if (it == mod_->by_name.end()) fail("undeclared net '" + name + "'");
    return it->second;
  }

  int range_width() {
    if (!accept("[")) return 1;
    const int msb = integer();
    expect(":");
    if (integer() != 0) fail("only [msb:0] ranges are supported");
    expect("]");
    return msb + 1;
  }

  int add_net(RtlNet net) {
    if (mod_->by_name.count(net.name)) fail("duplicate declaration of '" + net.name + "'");
    mod_->nets.push_back(net);
    const int id = static_cast<int>(mod_->nets.size()) - 1;
    mod_->by_name[net.name] = id;
    return id;
  }

  void port() {
    RtlNet net;
    if (accept_ident("input")) {
      net.dir = RtlNet::kInput;
    } else if (accept_ident("output")) {
      net.dir = RtlNet::kOutput;
    } else {
      fail("expected port direction");
    }
    if (accept_ident("reg")) {
      net.is_reg = true;
    } else {
      accept_ident("wire");
    }
    net.is_signed = accept_ident("signed");
    net.width = range_width();
    net.name = ident();
    mod_->ports.push_back(add_net(net));
  }

  void declare(bool is_reg) {
    RtlNet net;
    net.is_reg = is_reg;
    net.is_signed = accept_ident("signed");
    net.width = range_width();
    net.name = ident();
    if (accept("[")) {
      if (!is_reg) fail("memories must be reg");
      if (integer() != 0) fail("memory range must start at 0");
      expect(":");
      net.depth = integer() + 1;
      expect("]");
    }
    expect(";");
    add_net(net);
  }

  RtlAssign lvalue(bool allow_word) {
    RtlAssign a;
    a.line = peek().line;
    a.net = net_index(ident());
    const auto& net = mod_->nets[static_cast<std::size_t>(a.net)];
    if (net.dir == RtlNet::kInput) fail("assignment to input '" + net.name + "'");
    if (accept("[")) {
      a.index = integer();
      expect("]");
      const int limit = net.depth > 0 ? net.depth : net.width;
      if (a.index >= limit) fail("index out of range for '" + net.name + "'");
    }
    if (net.depth > 0 && (a.index < 0 || !allow_word)) fail("memory word writes only in initial");
    return a;
  }

  void always_block() {
    expect("@");
    expect("(");
    expect_ident("posedge");
    const int clk = net_index(ident());
    if (mod_->clock >= 0 && mod_->clock != clk) fail("one clock only");
    mod_->clock = clk;
    expect(")");
    expect_ident("begin");
    while (!accept_ident("end")) {
      RtlAssign a = lvalue(false);
      if (!mod_->nets[static_cast<std::size_t>(a.net)].is_reg) fail("nonblocking assign to wire");
      expect("<=");
      a.rhs = expr();
      expect(";");
      mod_->clocked.push_back(std::move(a));
    }
  }

  void initial_block() {
    expect_ident("begin");
    while (!accept_ident("end")) {
      RtlAssign a = lvalue(true);
      if (!mod_->nets[static_cast<std::size_t>(a.net)].is_reg) fail("initial assign to wire");
      expect("=");
      a.rhs = expr();
      if (a.rhs.kind != RtlExpr::kConst) fail("initial values must be literals");
      expect(";");
      mod_->init.push_back(std::move(a));
    }
  }

  RtlExpr expr() {
    RtlExpr lhs = sum();
    while (accept(">>")) {
      RtlExpr e;
      e.kind = RtlExpr::kShr;
      e.args.push_back(std::move(lhs));
      e.args.push_back(sum());
      lhs = std::move(e);
    }
    return lhs;
  }

  RtlExpr sum() {
    RtlExpr lhs = primary();
    while (accept("+")) {
      RtlExpr e;
      e.kind = RtlExpr::kAdd;
      e.args.push_back(std::move(lhs));
      e.args.push_back(primary());
      lhs = std::move(e);
    }
    return lhs;
  }

  RtlExpr primary() {
    RtlExpr e;
    if (peek().kind == Token::kNumber) {
      e.kind = RtlExpr::kConst;
      e.value = parse_literal(peek().text, peek().line);
      ++pos_;
      return e;
    }
    if (accept("(")) {
      e = expr();
      expect(")");
      return e;
    }
    if (accept("{")) {
      e.kind = RtlExpr::kConcat;
      do {
        e.args.push_back(expr());
      } while (accept(","));
      expect("}");
      return e;
    }
    e.net = net_index(ident());
    const auto& net = mod_->nets[static_cast<std::size_t>(e.net)];
    if (accept("[")) {
      e.kind = RtlExpr::kSelect;
      e.args.push_back(expr());
      expect("]");
      if (e.args[0].kind == RtlExpr::kConst) {
        const auto idx = e.args[0].value.low();
        const int limit = net.depth > 0 ? net.depth : net.width;
        if (idx >= static_cast<std::uint64_t>(limit)) fail("index out of range for '" + net.name + "'");
        e.const_index = static_cast<int>(idx);
      }
    } else {
      if (net.depth > 0) fail("memory '" + net.name + "' used without an index");
      e.kind = RtlExpr::kNet;
    }
    return e;
  }

  static void reads(const RtlExpr& e, std::vector<int>& out) {
    if (e.net >= 0) out.push_back(e.net);
    for (const auto& a : e.args) reads(a, out);
  }

  // Kahn ordering at net granularity: a net is ready once all its writers ran.
  std::vector<RtlAssign> order(std::vector<RtlAssign> comb) {
    const std::size_t n = mod_->nets.size();
    std::vector<int> writers(n, 0);
    for (const auto& a : comb) ++writers[static_cast<std::size_t>(a.net)];
    std::vector<std::vector<std::size_t>> readers(n);
    std::vector<int> pending(comb.size(), 0);
    for (std::size_t i = 0; i < comb.size(); ++i) {
      std::vector<int> r;
      reads(comb[i].rhs, r);
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      for (int net : r) {
        if (writers[static_cast<std::size_t>(net)] > 0) {
          ++pending[i];
          readers[static_cast<std::size_t>(net)].push_back(i);
        }
      }
    }
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < comb.size(); ++i) {
      if (pending[i] == 0) ready.push_back(i);
    }
    std::vector<RtlAssign> out;
    out.reserve(comb.size());
    while (!ready.empty()) {
      const std::size_t i = ready.front();
      ready.pop_front();
      const auto net = static_cast<std::size_t>(comb[i].net);
      out.push_back(std::move(comb[i]));
      if (--writers[net] == 0) {
        for (std::size_t r : readers[net]) {
          if (--pending[r] == 0) ready.push_back(r);
        }
      }
    }
    if (out.size() != pending.size()) {
      throw FormatError("rtl: combinational loop or undriven dependency");
    }
    return out;
  }
};

}  // namespace

std::shared_ptr<const RtlModule> parse_rtl(const std::string& text) {
  return Parser(text).run();
}

// ---------------------------------------------------------------- simulation

struct RtlSimulator::State {
  std::vector<BitVec> values;
  std::vector<std::vector<BitVec>> memories;
};

namespace {

BitVec eval(const RtlExpr& e, const std::vector<BitVec>& values,
            const std::vector<std::vector<BitVec>>& memories, const RtlModule& m) {
  switch (e.kind) {
    case RtlExpr::kConst:
      return e.value;
    case RtlExpr::kNet:
      return values[static_cast<std::size_t>(e.net)];
    case RtlExpr::kSelect: {
      const auto& net = m.nets[static_cast<std::size_t>(e.net)];
      std::uint64_t idx;
      if (e.const_index >= 0) {
        idx = static_cast<std::uint64_t>(e.const_index);
      } else {
        const BitVec iv = eval(e.args[0], values, memories, m);
        if (iv.width > 64) throw FormatError("rtl: index wider than 64 bits");
        idx = iv.low();
      }
      if (net.depth > 0) {
        if (idx >= static_cast<std::uint64_t>(net.depth)) {
          throw FormatError("rtl: memory '" + net.name + "' read out of range");
        }
        return memories[static_cast<std::size_t>(e.net)][idx];
      }
      BitVec out(1);
      if (idx < static_cast<std::uint64_t>(net.width)) {
        out.set_bit(0, values[static_cast<std::size_t>(e.net)].bit(static_cast<int>(idx)));
      }
      return out;
    }
    case RtlExpr::kConcat: {
      std::vector<BitVec> parts;
      int width = 0;
      for (const auto& a : e.args) {
        parts.push_back(eval(a, values, memories, m));
        width += parts.back().width;
      }
      BitVec out(width);
      int at = width;
      for (const auto& p : parts) {
        at -= p.width;
        for (int b = 0; b < p.width; ++b) {
          if (p.bit(b)) out.set_bit(at + b, true);
        }
      }
      return out;
    }
    case RtlExpr::kAdd: {
      const BitVec a = eval(e.args[0], values, memories, m);
      const BitVec b = eval(e.args[1], values, memories, m);
      const int w = std::max(a.width, b.width) + 1;
      if (w > 64) throw FormatError("rtl: adder wider than 64 bits");
      return from_u64(w, a.low() + b.low());
    }
    case RtlExpr::kShr: {
      const BitVec a = eval(e.args[0], values, memories, m);
      const BitVec b = eval(e.args[1], values, memories, m);
      if (b.width > 64) throw FormatError("rtl: shift amount wider than 64 bits");
      return shift_right(a, b.low());
    }
  }
  return {};
}

void store(const RtlAssign& a, const BitVec& v, std::vector<BitVec>& values, const RtlModule& m) {
  auto& dst = values[static_cast<std::size_t>(a.net)];
  if (a.index < 0) {
    dst = v.resized(m.nets[static_cast<std::size_t>(a.net)].width);
  } else {
    dst.set_bit(a.index, v.width > 0 && v.bit(0));
  }
}

}  // namespace

RtlSimulator::RtlSimulator(std::shared_ptr<const RtlModule> module)
    : module_(std::move(module)), state_(std::make_shared<State>()) {
  if (!module_) throw StateError("rtl: null module");
  for (const auto& net : module_->nets) {
    state_->values.emplace_back(net.width);
    state_->memories.emplace_back(net.depth > 0 ? static_cast<std::size_t>(net.depth) : 0,
                                  BitVec(net.width));
  }
  for (const auto& a : module_->init) {
    state_->memories[static_cast<std::size_t>(a.net)][static_cast<std::size_t>(a.index)] =
        a.rhs.value.resized(module_->nets[static_cast<std::size_t>(a.net)].width);
  }
  settle();
}

const std::string& RtlSimulator::module_name() const { return module_->name; }

std::vector<std::string> RtlSimulator::input_ports() const {
  std::vector<std::string> out;
  for (int p : module_->ports) {
    const auto& net = module_->nets[static_cast<std::size_t>(p)];
    if (net.dir == RtlNet::kInput) out.push_back(net.name);
  }
  return out;
}

std::vector<std::string> RtlSimulator::output_ports() const {
  std::vector<std::string> out;
  for (int p : module_->ports) {
    const auto& net = module_->nets[static_cast<std::size_t>(p)];
    if (net.dir == RtlNet::kOutput) out.push_back(net.name);
  }
  return out;
}

int RtlSimulator::port_width(const std::string& name) const {
  const auto it = module_->by_name.find(name);
  if (it == module_->by_name.end()) throw ShapeError("rtl: no net '" + name + "'");
  return module_->nets[static_cast<std::size_t>(it->second)].width;
}

void RtlSimulator::set_input(const std::string& port, std::span<const std::uint8_t> bits) {
  const auto it = module_->by_name.find(port);
  if (it == module_->by_name.end() ||
      module_->nets[static_cast<std::size_t>(it->second)].dir != RtlNet::kInput) {
    throw ShapeError("rtl: no input port '" + port + "'");
  }
  auto& v = state_->values[static_cast<std::size_t>(it->second)];
  if (bits.size() != static_cast<std::size_t>(v.width)) {
    throw ShapeError("rtl: port '" + port + "' is " + std::to_string(v.width) + " bits wide");
  }
  for (std::size_t i = 0; i < bits.size(); ++i) v.set_bit(static_cast<int>(i), bits[i] != 0);
  settle();
}

void RtlSimulator::settle() {
  for (const auto& a : module_->comb) {
    store(a, eval(a.rhs, state_->values, state_->memories, *module_), state_->values, *module_);
  }
}

void RtlSimulator::tick() {
  std::vector<BitVec> sampled;
  sampled.reserve(module_->clocked.size());
  for (const auto& a : module_->clocked) {
    sampled.push_back(eval(a.rhs, state_->values, state_->memories, *module_));
  }
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    store(module_->clocked[i], sampled[i], state_->values, *module_);
  }
  settle();
}

BitVec RtlSimulator::read(const std::string& net) const {
  const auto it = module_->by_name.find(net);
  if (it == module_->by_name.end()) throw ShapeError("rtl: no net '" + net + "'");
  return state_->values[static_cast<std::size_t>(it->second)];
}

std::int64_t RtlSimulator::read_signed(const std::string& port) const {
  const BitVec v = read(port);
  if (v.width > 64) throw ShapeError("rtl: '" + port + "' wider than 64 bits");
  std::uint64_t raw = v.low();
  if (v.width < 64 && v.bit(v.width - 1)) raw |= ~((std::uint64_t{1} << v.width) - 1);
  return static_cast<std::int64_t>(raw);
}

std::vector<std::int32_t> rtl_eval(RtlSimulator& sim, std::span<const std::uint8_t> bits,
                                   int act_dim, int latency) {
  sim.set_input("x", bits);
  for (int t = 0; t < latency; ++t) sim.tick();
  std::vector<std::int32_t> out;
  for (int d = 0; d < act_dim; ++d) {
    out.push_back(static_cast<std::int32_t>(sim.read_signed("y" + std::to_string(d))));
  }
  return out;
}

}  // namespace dwc
