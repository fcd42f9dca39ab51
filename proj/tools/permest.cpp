// permest command-line front end.
//
// Exit codes: 0 ok, 1 audit FAIL or internal error, 2 parse/usage error,
// 3 capacity limit, 4 domain error.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "permest/permest.hpp"

using namespace permest;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitAuditFail = 1;
constexpr int kExitParse = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitDomain = 4;

/// Shortest round-trip decimal.
std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Ordered key/value report printed as `key=value` lines or one JSON object.
class Report {
 public:
  void add(const std::string& key, double v) {
    text_.emplace_back(key, num(v));
    json_[key] = v;
  }
  void add(const std::string& key, cplx v) {
    text_.emplace_back(key, num(v.real()) + " " + num(v.imag()));
    json_[key] = {{"re", v.real()}, {"im", v.imag()}};
  }
  void add(const std::string& key, std::uint64_t v) {
    text_.emplace_back(key, std::to_string(v));
    json_[key] = v;
  }
  void add(const std::string& key, unsigned v) { add(key, std::uint64_t{v}); }
  void add(const std::string& key, const std::string& v) {
    text_.emplace_back(key, v);
    json_[key] = v;
  }
  void add(const std::string& key, const char* v) { add(key, std::string(v)); }

  void print(bool as_json) const {
    if (as_json) {
      std::cout << json_.dump(2) << "\n";
      return;
    }
    for (const auto& [k, v] : text_) std::cout << k << "=" << v << "\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> text_;
  json json_ = json::object();
};

std::string join(const std::vector<unsigned>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

ComplexMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::empty_input, 0, "cannot open '" + path + "'");
  return parse_matrix(in);
}

struct Common {
  std::string format = "text";
  bool json() const { return format == "json"; }
};

/// Wall time goes to stderr so stdout stays byte-identical across runs.
class Timer {
 public:
  ~Timer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::fprintf(stderr, "time_s=%.6f\n", s);
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

struct ExactArgs {
  std::string matrix, method = "ryser";
  std::vector<unsigned> mult;
};

void run_exact(const ExactArgs& a, const Common& c) {
  Timer timer;
  const ComplexMatrix m = read_matrix(a.matrix);
  Report r;
  cplx value;
  if (!a.mult.empty()) {
    const MultiplicitySpec spec(m, a.mult);
    if (a.method == "gengly") {
      value = permanent_gengly_exact(spec);
    } else {
      const ComplexMatrix full = expand(spec);
      value = a.method == "naive" ? permanent_naive(full)
              : a.method == "glynn" ? permanent_glynn_exact(full)
                                    : permanent_ryser(full);
    }
    r.add("n", std::uint64_t{spec.n()});
    r.add("mult", join(a.mult));
  } else {
    if (a.method == "gengly") throw DomainError("method gengly needs --mult");
    value = a.method == "naive" ? permanent_naive(m) : a.method == "glynn" ? permanent_glynn_exact(m) : permanent_ryser(m);
    r.add("n", std::uint64_t{m.rows()});
  }
  r.add("method", a.method);
  r.add("permanent", value);
  r.print(c.json());
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string matrix, mode = "random", space;
  std::vector<unsigned> mult;
  double epsilon = 0.0, delta = 0.01;
  std::uint64_t seed = 0;
  bool force_construction = false;
};

void run_estimate(const EstimateArgs& a, const Common& c) {
  Timer timer;
  const ComplexMatrix m = read_matrix(a.matrix);
  const bool multi = !a.mult.empty();
  const MultiplicitySpec spec = multi ? MultiplicitySpec(m, a.mult) : MultiplicitySpec::unit(m);
  if (!multi && !m.square()) throw DomainError("matrix must be square (or pass --mult)");
  const std::vector<unsigned> mods = spec.moduli();
  const std::vector<std::uint32_t> moduli(mods.begin(), mods.end());

  Estimate e;
  std::string descriptor;
  if (a.mode == "random") {
    e = multi ? estimate_random_multi(spec, a.epsilon, a.delta, a.seed)
              : estimate_random(m, a.epsilon, a.delta, a.seed);
  } else if (a.mode == "derandomized" || a.mode == "exhaustive") {
    if (!m.nonnegative_real()) throw DomainError("derandomized modes need real nonnegative entries");
    std::optional<SampleSpace> space;
    if (!a.space.empty()) {
      space.emplace(space_from_descriptor(a.space));
    } else if (a.mode == "exhaustive") {
      space.emplace(multi ? exhaustive_complex_space(moduli).space : exhaustive_binary_space(m.rows()));
    } else {
      if (!(a.epsilon > 0.0 && a.epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
      space.emplace(multi ? build_complex_space(moduli, a.epsilon, {a.force_construction}).space
                          : build_binary_space(m.rows(), a.epsilon));
    }
    descriptor = space->descriptor();
    e = multi ? estimate_derandomized_multi(spec, *space) : estimate_derandomized(m, *space);
  } else {
    throw DomainError("unknown mode '" + a.mode + "'");
  }

  const GuaranteeReport g = guarantee(e);
  Report r;
  r.add("value", e.value);
  r.add("bound_term", e.bound_term);
  r.add("epsilon", e.epsilon);
  if (e.mode == EstimateMode::random) r.add("delta", e.delta);
  r.add("guarantee", g.additive_error_bound);
  r.add("confidence", g.confidence);
  r.add("samples", e.samples_used);
  r.add("mode", to_string(e.mode));
  if (e.mode == EstimateMode::random) r.add("seed", a.seed);
  if (!descriptor.empty()) r.add("space", descriptor);
  r.print(c.json());
}

// ---------------------------------------------------------------------------

struct BoundArgs {
  std::string matrix;
  std::vector<unsigned> mult;
};

void run_bound(const BoundArgs& a, const Common& c) {
  const ComplexMatrix m = read_matrix(a.matrix);
  const MultiplicitySpec spec = a.mult.empty() ? MultiplicitySpec::unit(m) : MultiplicitySpec(m, a.mult);
  Report r;
  r.add("n", std::uint64_t{spec.n()});
  r.add("norm", spectral_norm(spec.base()).value);
  r.add("factor", std::exp(log_multiplicity_factor(spec.mults())));
  r.add("bound", permanent_upper_bound(spec));
  r.print(c.json());
}

// ---------------------------------------------------------------------------

struct SpaceArgs {
  std::string kind = "binary", descriptor;
  std::size_t n = 0;
  std::vector<unsigned> s;
  double epsilon = 0.0;
  bool exhaustive = false, force_construction = false;
  std::uint32_t prime = 0;
};

void run_space_build(const SpaceArgs& a, const Common& c) {
  Timer timer;
  Report r;
  if (a.kind == "binary") {
    if (a.n == 0) throw DomainError("--n is required for binary spaces");
    const SampleSpace s = a.exhaustive ? exhaustive_binary_space(a.n) : build_binary_space(a.n, a.epsilon);
    r.add("space", s.descriptor());
    r.add("seed_bits", s.seed_bits());
    r.add("seeds", s.seed_count());
    r.add("epsilon", s.declared_epsilon());
  } else if (a.kind == "complex") {
    if (a.s.empty()) throw DomainError("--s is required for complex spaces");
    std::vector<std::uint32_t> moduli;
    for (unsigned v : a.s) {
      if (v == 0) throw DomainError("--s values must be positive");
      moduli.push_back(v + 1);
    }
    const ComplexSampleSpace s = a.exhaustive ? exhaustive_complex_space(moduli)
                                              : build_complex_space(moduli, a.epsilon, {a.force_construction, a.prime});
    r.add("space", s.space.descriptor());
    r.add("seed_bits", s.space.seed_bits());
    r.add("seeds", s.space.seed_count());
    r.add("epsilon", s.space.declared_epsilon());
    r.add("mode", s.mode == ComplexSpaceMode::constructed ? "constructed" : "exhaustive");
    if (s.mode == ComplexSpaceMode::constructed) {
      r.add("prime", s.prime);
      r.add("walk_length", s.walk_length);
      r.add("beta", s.beta);
      r.add("strong_fraction_p", s.strong_fraction);
      r.add("tail_exponent_q", s.tail_exponent);
      r.add("analytic_walk_length", s.analytic_walk_length);
    }
  } else {
    throw DomainError("unknown space kind '" + a.kind + "'");
  }
  r.print(c.json());
}

int run_space_audit(const SpaceArgs& a, const Common& c) {
  Timer timer;
  const SampleSpace s = space_from_descriptor(a.descriptor);
  const double bias = s.is_binary() && !s.has_character_provider() ? measure_bias(s) : measure_complex_bias(s);
  // Uniform spaces declare 0; their character sums vanish up to rounding.
  const bool pass = bias <= std::max(s.declared_epsilon(), 1e-12);
  Report r;
  r.add("space", s.descriptor());
  r.add("bias", bias);
  r.add("declared_epsilon", s.declared_epsilon());
  r.add("result", pass ? "PASS" : "FAIL");
  r.print(c.json());
  return pass ? 0 : kExitAuditFail;
}

// ---------------------------------------------------------------------------

struct OpticsArgs {
  std::string unitary, mode = "random", output;
  std::vector<unsigned> out, in, pattern;
  std::optional<double> epsilon;
  double delta = 0.01;
  std::uint64_t seed = 0;
};

OccupationPattern input_pattern(const OpticsArgs& a, std::size_t modes, std::size_t n) {
  if (a.in.empty()) return OccupationPattern::standard(n, modes);
  return OccupationPattern(a.in);
}

void run_optics_exact(const OpticsArgs& a, const Common& c, bool amplitude) {
  const ComplexMatrix u = read_matrix(a.unitary);
  const OccupationPattern out(a.out);
  if (amplitude && a.epsilon) {
    if (!a.in.empty() && OccupationPattern(a.in) != OccupationPattern::standard(out.total(), u.rows())) {
      throw DomainError("estimation supports only the standard input state");
    }
    AmplitudeEstimateOptions opt;
    opt.mode = a.mode == "random"         ? EstimateMode::random
               : a.mode == "derandomized" ? EstimateMode::derandomized
               : a.mode == "exhaustive"   ? EstimateMode::exhaustive
                                          : throw DomainError("unknown mode '" + a.mode + "'");
    opt.delta = a.delta;
    opt.seed = a.seed;
    const AmplitudeResult res = amplitude_estimate(u, out, *a.epsilon, opt);
    Report r;
    r.add("amplitude", res.amplitude);
    r.add("probability", res.probability);
    r.add("amp_error_bound", res.amp_error_bound);
    r.add("prob_error_bound", res.prob_error_bound);
    r.add("confidence", res.confidence);
    r.add("samples", res.samples_used);
    r.add("mode", to_string(res.mode));
    r.print(c.json());
    return;
  }
  const OccupationPattern in = input_pattern(a, u.rows(), out.total());
  const AmplitudeResult res = amplitude_exact(u, out, in);
  Report r;
  if (amplitude) r.add("amplitude", res.amplitude);
  r.add("probability", res.probability);
  r.print(c.json());
}

void run_optics_bound(const OpticsArgs& a, const Common& c) {
  Report r;
  r.add("bound", bunching_bound(OccupationPattern(a.pattern)));
  r.print(c.json());
}

void run_optics_saturate(const OpticsArgs& a, const Common& c) {
  const OccupationPattern p(a.pattern);
  const ComplexMatrix u = saturating_unitary(p);
  const OccupationPattern outcome = saturating_outcome(p);
  const AmplitudeResult res = amplitude_exact(u, outcome, OccupationPattern::standard(p.total(), p.total()));
  if (!a.output.empty()) {
    std::ofstream f(a.output);
    if (!f) throw DomainError("cannot write '" + a.output + "'");
    f << serialize(u);
  }
  Report r;
  r.add("n", std::uint64_t{p.total()});
  r.add("outcome", join(outcome.counts()));
  r.add("probability", res.probability);
  r.add("bound", bunching_bound(p));
  if (!a.output.empty()) r.add("unitary_file", a.output);
  r.print(c.json());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permanent estimation: exact, randomized and derandomized"};
  app.require_subcommand(1);
  app.fallthrough();  // --format may follow the subcommand
  Common common;
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  ExactArgs ex;
  auto* exact = app.add_subcommand("exact", "Exact permanent");
  exact->add_option("--matrix", ex.matrix, "Matrix file")->required();
  exact->add_option("--method", ex.method)->check(CLI::IsMember({"naive", "ryser", "glynn", "gengly"}));
  exact->add_option("--mult", ex.mult, "Column multiplicities s1,s2,...")->delimiter(',');

  EstimateArgs es;
  auto* estimate = app.add_subcommand("estimate", "Additive-error permanent estimate");
  estimate->add_option("--matrix", es.matrix, "Matrix file")->required();
  estimate->add_option("--mult", es.mult, "Column multiplicities s1,s2,...")->delimiter(',');
  estimate->add_option("--epsilon", es.epsilon)->required();
  estimate->add_option("--delta", es.delta, "Failure probability (random mode)")->capture_default_str();
  estimate->add_option("--mode", es.mode)->check(CLI::IsMember({"random", "derandomized", "exhaustive"}));
  estimate->add_option("--seed", es.seed, "RNG seed (random mode)");
  estimate->add_option("--space", es.space, "Space descriptor (derandomized mode)");
  estimate->add_flag("--force-construction", es.force_construction, "Never substitute the exhaustive space");

  BoundArgs bd;
  auto* bound = app.add_subcommand("bound", "Upper bound on |Per|");
  bound->add_option("--matrix", bd.matrix, "Matrix file (the base matrix B with --mult)")->required();
  bound->add_option("--mult", bd.mult)->delimiter(',');

  SpaceArgs sp;
  auto* space = app.add_subcommand("space", "Small-bias sample spaces");
  space->require_subcommand(1);
  auto* build = space->add_subcommand("build", "Construct a space and print its descriptor");
  build->add_option("--kind", sp.kind)->check(CLI::IsMember({"binary", "complex"}));
  build->add_option("--n", sp.n, "Coordinates (binary)");
  build->add_option("--s", sp.s, "Multiplicities s1,...,sk (complex; moduli s_i+1)")->delimiter(',');
  build->add_option("--epsilon", sp.epsilon);
  build->add_option("--prime", sp.prime, "Field size for the complex construction");
  build->add_flag("--exhaustive", sp.exhaustive, "The uniform space");
  build->add_flag("--force-construction", sp.force_construction, "Never substitute the exhaustive space");
  auto* audit = space->add_subcommand("audit", "Measure the bias of a space exactly");
  audit->add_option("--space", sp.descriptor, "Space descriptor")->required();

  OpticsArgs op;
  auto* optics = app.add_subcommand("optics", "Linear-optics amplitudes and bounds");
  optics->require_subcommand(1);
  auto* prob = optics->add_subcommand("prob", "Exact outcome probability");
  auto* amp = optics->add_subcommand("amp", "Exact or estimated outcome amplitude");
  for (auto* sub : {prob, amp}) {
    sub->add_option("--unitary", op.unitary, "Unitary matrix file")->required();
    sub->add_option("--out", op.out, "Output pattern")->delimiter(',')->required();
    sub->add_option("--in", op.in, "Input pattern (default: standard initial state)")->delimiter(',');
  }
  amp->add_option("--epsilon", op.epsilon, "Estimate instead of computing exactly");
  amp->add_option("--mode", op.mode)->check(CLI::IsMember({"random", "derandomized", "exhaustive"}));
  amp->add_option("--delta", op.delta)->capture_default_str();
  amp->add_option("--seed", op.seed);
  auto* obound = optics->add_subcommand("bound", "Bunching bound prod s!/s^s");
  obound->add_option("--pattern", op.pattern)->delimiter(',')->required();
  auto* saturate = optics->add_subcommand("saturate", "Block-Fourier unitary saturating the bound");
  saturate->add_option("--pattern", op.pattern)->delimiter(',')->required();
  saturate->add_option("--output", op.output, "Write the unitary to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (*exact) run_exact(ex, common);
    else if (*estimate) run_estimate(es, common);
    else if (*bound) run_bound(bd, common);
    else if (*build) run_space_build(sp, common);
    else if (*audit) return run_space_audit(sp, common);
    else if (*prob) run_optics_exact(op, common, false);
    else if (*amp) run_optics_exact(op, common, true);
    else if (*obound) run_optics_bound(op, common);
    else if (*saturate) run_optics_saturate(op, common);
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
