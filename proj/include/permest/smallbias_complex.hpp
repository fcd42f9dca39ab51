#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "permest/errors.hpp"
#include "permest/phase.hpp"
#include "permest/sample_space.hpp"
#include "permest/smallbias_binary.hpp"

namespace permest {

// ---------------------------------------------------------------------------
// theta-strongness

/// Tolerance used to keep the theta boundary inclusive under rounding.
inline constexpr double kArgSlack = 1e-12;

/// True iff |arg lambda| >= theta, with arg taken in [-pi, pi).
inline bool theta_strong(cplx lambda, double theta) {
  if (std::abs(std::abs(lambda) - 1.0) > 1e-9) throw DomainError("theta_strong expects a unit complex number");
  return std::abs(std::arg(lambda)) >= theta - kArgSlack;
}

/// Exact strongness test for a root of unity exp(2 pi i phase / modulus):
/// |arg| >= theta with |arg| = 2 pi min(phase, modulus - phase) / modulus.
inline bool root_theta_strong(std::uint64_t phase, std::uint64_t modulus, double theta) {
  phase %= modulus;
  const std::uint64_t dist = std::min(phase, modulus - phase);
  return 2.0 * std::numbers::pi * static_cast<double>(dist) / static_cast<double>(modulus) >= theta - kArgSlack;
}

// ---------------------------------------------------------------------------
// c-wise independent tuples over F_p

inline bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

inline std::uint64_t smallest_prime_above(std::uint64_t v) {
  std::uint64_t p = v + 1;
  while (!is_prime(p)) ++p;
  return p;
}

/// Seeds are the coefficient vectors of polynomials of degree < independence
/// over F_p (base-p digits, constant term least significant). Coordinate i is
/// the polynomial evaluated at the field point i, so any `independence`
/// coordinates are jointly uniform on F_p. Reducing mod (s_i + 1) gives values
/// within statistical distance (s_i + 1) / p of uniform on {0..s_i}.
class CwiseGenerator {
 public:
  CwiseGenerator(std::uint32_t prime, unsigned independence, std::vector<std::uint32_t> moduli)
      : prime_(prime), independence_(independence), moduli_(std::move(moduli)) {
    if (!is_prime(prime_)) throw DomainError("generator modulus must be prime");
    if (independence_ == 0) throw DomainError("independence must be at least 1");
    if (moduli_.size() > prime_) throw DomainError("need p >= k distinct evaluation points");
    seed_count_ = 1;
    for (unsigned i = 0; i < independence_; ++i) {
      if (seed_count_ > (std::uint64_t{1} << 62) / prime_) throw CapacityError("c-wise seed space too large");
      seed_count_ *= prime_;
    }
  }

  std::uint32_t prime() const noexcept { return prime_; }
  unsigned independence() const noexcept { return independence_; }
  unsigned degree() const noexcept { return independence_ - 1; }
  std::span<const std::uint32_t> moduli() const noexcept { return moduli_; }
  std::uint64_t seed_count() const noexcept { return seed_count_; }

  /// Raw field values t_i in F_p.
  void field_values(std::uint64_t seed, std::span<std::uint32_t> out) const {
    if (seed >= seed_count_) throw DomainError("c-wise seed out of range");
    std::uint32_t coeff[64];
    for (unsigned d = 0; d < independence_; ++d) {
      coeff[d] = static_cast<std::uint32_t>(seed % prime_);
      seed /= prime_;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint64_t acc = 0;
      for (unsigned d = independence_; d-- > 0;) acc = (acc * i + coeff[d]) % prime_;
      out[i] = static_cast<std::uint32_t>(acc);
    }
  }

  /// Tuple f_i = t_i mod (s_i + 1).
  void tuple(std::uint64_t seed, std::span<std::uint32_t> out) const {
    field_values(seed, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] %= moduli_[i];
  }

 private:
  std::uint32_t prime_;
  unsigned independence_;
  std::vector<std::uint32_t> moduli_;
  std::uint64_t seed_count_ = 0;
};

inline std::vector<std::uint32_t> cwise_tuple(const CwiseGenerator& gen, std::uint64_t seed) {
  std::vector<std::uint32_t> out(gen.moduli().size());
  gen.tuple(seed, out);
  return out;
}

// ---------------------------------------------------------------------------
// Strong products

/// Constants of the strong-product construction.
struct StrongProductParams {
  unsigned c = 7;
  double theta_strong = std::numbers::pi / 8;
  double theta_intermediate = std::numbers::pi / 4;
  double success_prob = 1.0 / 16;

  /// Pr[w_i = 1] at scale h: min(1 / 2^(h-1), 1).
  static double membership_probability(unsigned h) { return h <= 1 ? 1.0 : std::ldexp(1.0, 1 - static_cast<int>(h)); }
};

/// Prime for the c-wise generators: smallest prime above max(k, max(s_i + 1)).
inline std::uint32_t strong_product_prime(std::span<const std::uint32_t> moduli) {
  std::uint64_t floor = moduli.size();
  for (std::uint32_t m : moduli) floor = std::max<std::uint64_t>(floor, m);
  return static_cast<std::uint32_t>(smallest_prime_above(floor));
}

/// Generates exponent tuples f such that for every nonzero exponent vector e,
/// prod_i xi_i^{f_i} (xi_i = exp(2 pi i e_i / (s_i+1))) is pi/8-strong with
/// probability at least 1/16.
///
/// One seed holds a c-wise independent tuple u, a pairwise independent tuple
/// t in F_p and mixing bits. For each scale h = 0..floor(log2 k) the
/// membership set is W_h = {i : t_i < ceil(p * min(2^(1-h), 1))} and
/// f^(h)_i = u_i on W_h, 0 elsewhere. Scales with equal thresholds yield equal
/// f^(h) and are merged. With several distinct scales the output is
/// sum_h b_h f^(h) mod (s_i + 1) over mixing bits b_h; with one scale it is
/// f^(0) itself. The u and t tuples are shared across scales: the mixing-bit
/// argument only conditions on the other scales' values, never on their
/// independence.
class StrongProductGenerator {
 public:
  explicit StrongProductGenerator(std::vector<std::uint32_t> moduli, StrongProductParams params = {})
      : StrongProductGenerator(moduli, strong_product_prime(moduli), params) {}

  StrongProductGenerator(std::vector<std::uint32_t> moduli, std::uint32_t prime, StrongProductParams params = {})
      : params_(params),
        moduli_(std::move(moduli)),
        prime_(prime),
        values_(prime_, std::min<unsigned>(params_.c, static_cast<unsigned>(moduli_.size())), moduli_),
        membership_(prime_, 2, moduli_) {
    if (moduli_.empty()) throw DomainError("need at least one coordinate");
    if (moduli_.size() > 64) throw CapacityError("at most 64 coordinates");
    for (std::uint32_t m : moduli_) {
      if (m < 2) throw DomainError("moduli must be at least 2");
      if (m > prime_) throw DomainError("prime must exceed every modulus");
    }
    const auto top_scale = static_cast<unsigned>(std::bit_width(moduli_.size())) - 1;
    for (unsigned h = 0; h <= top_scale; ++h) {
      const auto thr = static_cast<std::uint32_t>(
          std::ceil(static_cast<double>(prime_) * StrongProductParams::membership_probability(h)));
      if (thresholds_.empty() || thresholds_.back() != thr) thresholds_.push_back(thr);
    }
    mixing_bits_ = thresholds_.size() > 1 ? static_cast<unsigned>(thresholds_.size()) : 0;
    seed_count_ = (values_.seed_count() * membership_.seed_count()) << mixing_bits_;
  }

  const StrongProductParams& params() const noexcept { return params_; }
  std::span<const std::uint32_t> moduli() const noexcept { return moduli_; }
  std::uint32_t prime() const noexcept { return prime_; }
  /// Distinct membership thresholds, one per merged scale.
  std::span<const std::uint32_t> thresholds() const noexcept { return thresholds_; }
  unsigned mixing_bits() const noexcept { return mixing_bits_; }
  const CwiseGenerator& value_generator() const noexcept { return values_; }
  const CwiseGenerator& membership_generator() const noexcept { return membership_; }
  std::uint64_t seed_count() const noexcept { return seed_count_; }

  void sample(std::uint64_t seed, std::span<std::uint32_t> out) const {
    if (seed >= seed_count_) throw DomainError("strong-product seed out of range");
    const std::uint64_t bits = mixing_bits_ ? seed & ((std::uint64_t{1} << mixing_bits_) - 1) : 1;
    seed >>= mixing_bits_;
    const std::uint64_t member_seed = seed % membership_.seed_count();
    const std::uint64_t value_seed = seed / membership_.seed_count();

    std::uint32_t t[64];
    membership_.field_values(member_seed, std::span<std::uint32_t>(t, out.size()));
    values_.tuple(value_seed, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint32_t hits = 0;
      for (std::size_t h = 0; h < thresholds_.size(); ++h) hits += ((bits >> h) & 1) && t[i] < thresholds_[h];
      out[i] = static_cast<std::uint32_t>((std::uint64_t{out[i]} * hits) % moduli_[i]);
    }
  }

  /// f^(h) for one merged scale, without mixing.
  void sample_scale(std::uint64_t value_seed, std::uint64_t member_seed, std::size_t scale,
                    std::span<std::uint32_t> out) const {
    std::uint32_t t[64];
    membership_.field_values(member_seed, std::span<std::uint32_t>(t, out.size()));
    values_.tuple(value_seed, out);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (t[i] >= thresholds_.at(scale)) out[i] = 0;
  }

 private:
  StrongProductParams params_;
  std::vector<std::uint32_t> moduli_;
  std::uint32_t prime_;
  CwiseGenerator values_;
  CwiseGenerator membership_;
  std::vector<std::uint32_t> thresholds_;
  unsigned mixing_bits_ = 0;
  std::uint64_t seed_count_ = 0;
};

inline std::vector<std::uint32_t> strong_product_sample(const StrongProductGenerator& gen, std::uint64_t seed) {
  std::vector<std::uint32_t> out(gen.moduli().size());
  gen.sample(seed, out);
  return out;
}

/// Phase of prod_i xi_i^{f_i} as a fraction of a full turn, reduced to a
/// common denominator L = lcm(moduli): returns (numerator mod L, L).
inline std::pair<std::uint64_t, std::uint64_t> character_phase(std::span<const std::uint32_t> exponents,
                                                               std::span<const std::uint32_t> f,
                                                               std::span<const std::uint32_t> moduli) {
  std::uint64_t lcm = 1;
  for (std::uint32_t m : moduli) lcm = std::lcm(lcm, std::uint64_t{m});
  std::uint64_t num = 0;
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    num = (num + (std::uint64_t{exponents[i]} * f[i] % moduli[i]) * (lcm / moduli[i])) % lcm;
  }
  return {num, lcm};
}

/// Fraction of strong-product seeds for which the character e gives a
/// theta-strong product, by full enumeration.
inline double strong_fraction(const StrongProductGenerator& gen, std::span<const std::uint32_t> exponents,
                              double theta) {
  std::vector<std::uint32_t> f(gen.moduli().size());
  std::uint64_t hits = 0;
  for (std::uint64_t seed = 0; seed < gen.seed_count(); ++seed) {
    gen.sample(seed, f);
    const auto [num, den] = character_phase(exponents, f, gen.moduli());
    hits += root_theta_strong(num, den, theta);
  }
  return static_cast<double>(hits) / static_cast<double>(gen.seed_count());
}

// ---------------------------------------------------------------------------
// Expander walks

/// 8-regular Margulis-Gabber-Galil graph on Z_side x Z_side. Vertex (x, y) has
/// id x * side + y.
class MargulisExpander {
 public:
  static constexpr unsigned kDegree = 8;

  explicit MargulisExpander(std::uint64_t side) : side_(side) {
    if (side_ < 2) throw DomainError("expander side must be at least 2");
  }

  /// Smallest graph with at least `count` vertices.
  static MargulisExpander covering(std::uint64_t count) {
    auto side = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    while (side * side < count) ++side;
    while (side > 2 && (side - 1) * (side - 1) >= count) --side;
    return MargulisExpander(std::max<std::uint64_t>(side, 2));
  }

  std::uint64_t side() const noexcept { return side_; }
  std::uint64_t vertex_count() const noexcept { return side_ * side_; }

  std::uint64_t neighbor(std::uint64_t v, unsigned label) const {
    const std::uint64_t m = side_;
    std::uint64_t x = v / m, y = v % m;
    switch (label) {
      case 0: x = (x + y) % m; break;
      case 1: x = (x + m - y) % m; break;
      case 2: x = (x + y + 1) % m; break;
      case 3: x = (x + 2 * m - y - 1) % m; break;
      case 4: y = (y + x) % m; break;
      case 5: y = (y + m - x) % m; break;
      case 6: y = (y + x + 1) % m; break;
      case 7: y = (y + 2 * m - x - 1) % m; break;
      default: throw DomainError("edge label out of range");
    }
    return x * m + y;
  }

 private:
  std::uint64_t side_;
};

/// Deterministic amplification by an expander walk.
///
/// `group_size` and `strong_fraction` are the grouping constants t and
/// p = 1/(2t) is the guaranteed strong fraction per draw; `tail_exponent` is q.
struct AmplifierParams {
  MargulisExpander expander{2};
  unsigned walk_length = 1;
  unsigned group_size = 18;
  double strong_fraction = 1.0 / 36;
  double tail_exponent = 0.0;

  std::uint64_t walk_seed_count() const {
    std::uint64_t total = expander.vertex_count();
    for (unsigned i = 1; i < walk_length; ++i) total *= MargulisExpander::kDegree;
    return total;
  }
};

/// Group size t: independent strong-product draws needed so that at least one
/// is strong with probability >= 2/3, i.e. ceil(log_{15/16}(1/3)).
inline unsigned amplifier_group_size(double success_prob = 1.0 / 16) {
  return static_cast<unsigned>(std::ceil(std::log(1.0 / 3.0) / std::log(1.0 - success_prob)));
}

/// The walk for one walk seed: start vertex (seed mod |V|) then walk_length - 1
/// edge labels in base 8.
inline std::vector<std::uint64_t> amplify(const AmplifierParams& params, std::uint64_t base_seed_count,
                                          std::uint64_t walk_seed) {
  if (params.expander.vertex_count() != base_seed_count) {
    throw DomainError("expander vertex count must equal the base seed space size");
  }
  if (params.walk_length == 0) throw DomainError("walk length must be positive");
  if (walk_seed >= params.walk_seed_count()) throw DomainError("walk seed out of range");
  std::vector<std::uint64_t> walk(params.walk_length);
  std::uint64_t v = walk_seed % base_seed_count;
  walk_seed /= base_seed_count;
  walk[0] = v;
  for (unsigned i = 1; i < params.walk_length; ++i) {
    v = params.expander.neighbor(v, static_cast<unsigned>(walk_seed % MargulisExpander::kDegree));
    walk_seed /= MargulisExpander::kDegree;
    walk[i] = v;
  }
  return walk;
}

/// Exact probability, over all walk seeds, that fewer than `needed` walk
/// vertices fall in `target`. Dynamic programming over (vertex, hits).
inline double walk_failure_probability(const MargulisExpander& g, unsigned walk_length,
                                       const std::vector<bool>& target, unsigned needed) {
  const std::uint64_t nv = g.vertex_count();
  if (target.size() != nv) throw DomainError("target set must cover every vertex");
  const unsigned cap = needed;  // hits beyond `needed` are all successes
  std::vector<double> cur(nv * (cap + 1), 0.0), next(nv * (cap + 1));
  const double start = 1.0 / static_cast<double>(nv);
  for (std::uint64_t v = 0; v < nv; ++v) cur[v * (cap + 1) + std::min<unsigned>(target[v], cap)] += start;
  for (unsigned step = 1; step < walk_length; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint64_t v = 0; v < nv; ++v) {
      for (unsigned h = 0; h <= cap; ++h) {
        const double mass = cur[v * (cap + 1) + h];
        if (mass == 0.0) continue;
        for (unsigned l = 0; l < MargulisExpander::kDegree; ++l) {
          const std::uint64_t u = g.neighbor(v, l);
          next[u * (cap + 1) + std::min<unsigned>(h + target[u], cap)] += mass / MargulisExpander::kDegree;
        }
      }
    }
    cur.swap(next);
  }
  double fail = 0.0;
  for (std::uint64_t v = 0; v < nv; ++v)
    for (unsigned h = 0; h < cap; ++h) fail += cur[v * (cap + 1) + h];
  return fail;
}

// ---------------------------------------------------------------------------
// Complex small-bias spaces

/// beta = |1 + e^{i pi/8}| / 2: the largest |E_d[lambda^d]| for a pi/8-strong lambda.
inline double strong_beta() { return 0.5 * std::abs(cplx(1.0, 0.0) + std::polar(1.0, std::numbers::pi / 8)); }

/// Walk length from the amplification analysis:
/// ceil(max(log_{1/2}(eps/2) / q, log_beta(eps/2) / p)).
inline unsigned analytic_walk_length(double epsilon, double strong_fraction, double tail_exponent) {
  const double by_tail = std::log(epsilon / 2) / std::log(0.5) / tail_exponent;
  const double by_beta = std::log(epsilon / 2) / std::log(strong_beta()) / strong_fraction;
  return static_cast<unsigned>(std::ceil(std::max(by_tail, by_beta)));
}

/// Measured q: -log2(failure) / walk_length for a fixed pseudo-random
/// density-2/3 vertex set on the 2^10-vertex reference graph, walk length 16,
/// success meaning at least half the walk lands in the set.
inline double reference_tail_exponent() {
  const MargulisExpander g(32);
  std::vector<bool> target(g.vertex_count());
  std::uint64_t state = 0x5eed;
  for (std::size_t v = 0; v < target.size(); ++v) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    target[v] = (state >> 33) % 3 != 0;
  }
  const unsigned len = 16;
  return -std::log2(walk_failure_probability(g, len, target, len / 2)) / len;
}

enum class ComplexSpaceMode { constructed, exhaustive };

/// A sample space over R[s_1+1] x ... x R[s_k+1] plus construction metadata.
struct ComplexSampleSpace {
  SampleSpace space;
  ComplexSpaceMode mode = ComplexSpaceMode::exhaustive;
  std::uint32_t prime = 0;
  unsigned c = 7;
  unsigned r = 0;            // ceil(log2) of the walk graph's vertex count
  unsigned walk_length = 0;  // l: number of strong-product draws combined
  double beta = strong_beta();
  double strong_fraction = 0.0;  // p = 1/(2t)
  double tail_exponent = 0.0;    // q
  unsigned analytic_walk_length = 0;
};

inline ComplexSampleSpace exhaustive_complex_space(std::vector<std::uint32_t> moduli, double declared_epsilon = 0.0) {
  if (moduli.empty()) throw DomainError("need at least one coordinate");
  for (std::uint32_t m : moduli)
    if (m < 2) throw DomainError("moduli must be at least 2");
  const std::uint64_t domain = domain_size(moduli);
  if (domain > (std::uint64_t{1} << kMaxSeedBits)) throw CapacityError("exhaustive space exceeds 2^40 seeds");
  std::ostringstream desc;
  desc << "complex k=" << moduli.size() << " s=";
  for (std::size_t i = 0; i < moduli.size(); ++i) desc << (i ? "," : "") << moduli[i] - 1;
  desc << " p=0 c=7 r=0 l=0 eps=" << detail::format_eps(declared_epsilon) << " mode=exhaustive";
  auto mods = moduli;
  auto gen = [mods](std::uint64_t seed, std::span<std::uint32_t> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::uint32_t>(seed % mods[i]);
      seed /= mods[i];
    }
  };
  ComplexSampleSpace out{SampleSpace(moduli, domain, declared_epsilon, desc.str(), std::move(gen))};
  out.mode = ComplexSpaceMode::exhaustive;
  return out;
}

/// E[chi_e] for every exponent vector e over the amplified construction, for
/// every walk length 1..max_length at once: a uniform walk v_1..v_l on the
/// expander, independent bits d_j, output sum_j d_j f(v_j). Averaging over d
/// gives prod_j (1 + chi_e(f(v_j))) / 2, which is summed over walks by dynamic
/// programming on the vertex set. Result [l-1][e].
inline std::vector<std::vector<cplx>> walk_character_tables(const StrongProductGenerator& base,
                                                            const MargulisExpander& graph, unsigned max_length) {
  const auto moduli = base.moduli();
  const std::uint64_t domain = domain_size(moduli);
  const std::uint64_t nv = graph.vertex_count();
  std::vector<std::uint32_t> fidx(nv);
  std::vector<std::uint32_t> f(moduli.size());
  for (std::uint64_t v = 0; v < nv; ++v) {
    base.sample(v % base.seed_count(), f);
    fidx[v] = static_cast<std::uint32_t>(SampleSpace::pack(f, moduli));
  }
  std::vector<std::uint32_t> nbr(nv * MargulisExpander::kDegree);
  for (std::uint64_t v = 0; v < nv; ++v)
    for (unsigned l = 0; l < MargulisExpander::kDegree; ++l)
      nbr[v * MargulisExpander::kDegree + l] = static_cast<std::uint32_t>(graph.neighbor(v, l));

  std::vector<std::vector<cplx>> tables(max_length, std::vector<cplx>(domain));
  std::vector<std::uint32_t> e(moduli.size()), x(moduli.size());
  std::vector<cplx> half(domain), weight(nv), cur(nv), next(nv);
  auto total = [&] {
    cplx acc = 0.0;
    for (const cplx& z : cur) acc += z;
    return acc / static_cast<double>(nv);
  };
  for (std::uint64_t eidx = 0; eidx < domain; ++eidx) {
    SampleSpace::unpack(eidx, moduli, e);
    for (std::uint64_t xidx = 0; xidx < domain; ++xidx) {
      SampleSpace::unpack(xidx, moduli, x);
      const auto [num, den] = character_phase(e, x, moduli);
      half[xidx] = 0.5 * (1.0 + root_of_unity(num, den));
    }
    for (std::uint64_t v = 0; v < nv; ++v) cur[v] = weight[v] = half[fidx[v]];
    if (max_length > 0) tables[0][eidx] = total();
    for (unsigned step = 1; step < max_length; ++step) {
      std::fill(next.begin(), next.end(), cplx(0.0));
      for (std::uint64_t v = 0; v < nv; ++v) {
        const cplx mass = cur[v];
        const std::uint32_t* out = &nbr[v * MargulisExpander::kDegree];
        for (unsigned l = 0; l < MargulisExpander::kDegree; ++l) next[out[l]] += mass;
      }
      for (std::uint64_t v = 0; v < nv; ++v) cur[v] = next[v] * weight[v] / double(MargulisExpander::kDegree);
      tables[step][eidx] = total();
    }
  }
  return tables;
}

inline std::vector<cplx> walk_character_table(const StrongProductGenerator& base, const MargulisExpander& graph,
                                              unsigned walk_length) {
  if (walk_length == 0) throw DomainError("walk length must be positive");
  return std::move(walk_character_tables(base, graph, walk_length).back());
}

namespace detail {

inline std::string complex_descriptor(std::span<const std::uint32_t> moduli, std::uint32_t prime, unsigned c,
                                      unsigned r, unsigned l, double eps, ComplexSpaceMode mode) {
  std::ostringstream desc;
  desc << "complex k=" << moduli.size() << " s=";
  for (std::size_t i = 0; i < moduli.size(); ++i) desc << (i ? "," : "") << moduli[i] - 1;
  desc << " p=" << prime << " c=" << c << " r=" << r << " l=" << l << " eps=" << format_eps(eps)
       << " mode=" << (mode == ComplexSpaceMode::constructed ? "constructed" : "exhaustive");
  return desc.str();
}

}  // namespace detail

/// The amplified construction for a fixed walk length:
/// seed = (walk seed, d_1..d_l); the walk visits l strong-product seeds giving
/// tuples f^(1..l), and the output is sum_j d_j f^(j) mod (s_i + 1).
inline ComplexSampleSpace complex_space_with_walk(std::vector<std::uint32_t> moduli, unsigned walk_length,
                                                  double declared_epsilon, std::uint32_t prime = 0) {
  if (walk_length == 0) throw DomainError("walk length must be positive");
  if (prime == 0) prime = strong_product_prime(moduli);
  auto base = std::make_shared<const StrongProductGenerator>(moduli, prime);
  AmplifierParams amp{MargulisExpander::covering(base->seed_count()), walk_length};
  amp.group_size = amplifier_group_size(base->params().success_prob);
  amp.strong_fraction = 1.0 / (2.0 * amp.group_size);

  const std::uint64_t walks = amp.walk_seed_count();
  const unsigned walk_bits = static_cast<unsigned>(std::bit_width(walks - 1));
  if (walk_bits + walk_length > kMaxSeedBits) throw CapacityError("complex space needs more than 40 seed bits");
  const std::uint64_t seeds = walks << walk_length;
  const std::uint64_t vertices = amp.expander.vertex_count();
  const std::uint64_t base_count = base->seed_count();

  const unsigned r = static_cast<unsigned>(std::bit_width(vertices - 1));
  auto gen = [base, amp, vertices, base_count, walk_length](std::uint64_t seed, std::span<std::uint32_t> x) {
    const std::uint64_t d = seed & ((std::uint64_t{1} << walk_length) - 1);
    std::uint64_t walk = seed >> walk_length;
    std::uint32_t f[64];
    std::fill(x.begin(), x.end(), 0u);
    std::uint64_t v = walk % vertices;
    walk /= vertices;
    const auto mods = base->moduli();
    for (unsigned j = 0; j < walk_length; ++j) {
      if (j) {
        v = amp.expander.neighbor(v, static_cast<unsigned>(walk % MargulisExpander::kDegree));
        walk /= MargulisExpander::kDegree;
      }
      if (!((d >> j) & 1)) continue;
      base->sample(v % base_count, std::span<std::uint32_t>(f, x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] + f[i]) % mods[i];
    }
  };
  const std::string desc = detail::complex_descriptor(moduli, base->prime(), base->params().c, r, walk_length,
                                                      declared_epsilon, ComplexSpaceMode::constructed);
  SampleSpace space(moduli, seeds, declared_epsilon, desc, std::move(gen));
  const double domain = static_cast<double>(domain_size(moduli));
  const double cost = domain * (domain * static_cast<double>(moduli.size()) +
                                static_cast<double>(vertices) * MargulisExpander::kDegree * walk_length);
  // The table is computed once and shared by every copy of the space.
  struct TableCache {
    std::once_flag once;
    std::vector<cplx> table;
  };
  auto cache = std::make_shared<TableCache>();
  space.set_character_provider(
      [base, graph = amp.expander, walk_length, cache] {
        std::call_once(cache->once, [&] { cache->table = walk_character_table(*base, graph, walk_length); });
        return cache->table;
      },
      cost);

  ComplexSampleSpace out{std::move(space)};
  out.mode = ComplexSpaceMode::constructed;
  out.prime = base->prime();
  out.c = base->params().c;
  out.r = r;
  out.walk_length = walk_length;
  out.strong_fraction = amp.strong_fraction;
  return out;
}

/// Complex bias: max over nonzero exponent vectors e of |E[x_1^{e_1} ... x_k^{e_k}]|,
/// computed exactly over every seed. Requires an audit cost of at most 2^32 operations.
inline double measure_complex_bias(const SampleSpace& space) {
  if (space.audit_cost() > std::ldexp(1.0, kMaxAuditLog2)) {
    throw CapacityError("complex bias audit would exceed 2^32 operations");
  }
  const std::vector<cplx> table = space.character_table();
  double worst = 0.0;
  for (std::size_t idx = 1; idx < table.size(); ++idx) worst = std::max(worst, std::abs(table[idx]));
  return worst;
}

inline constexpr std::uint64_t kComplexFallbackMaxDomain = std::uint64_t{1} << 20;

struct ComplexBuildOptions {
  bool force_construction = false;  // never return the exhaustive space
  std::uint32_t prime = 0;          // 0: search primes from the smallest admissible one up to 17
};

namespace detail {

struct WalkChoice {
  unsigned walk_length = 0;  // 0: none within limits reaches epsilon
  unsigned seed_bits = 0;
  double best_bias = 1.0;
  unsigned max_length = 0;
};

/// Shortest walk length over the strong-product generator with this prime
/// whose exact bias is <= epsilon, within the seed-bit and audit-cost limits.
inline WalkChoice shortest_walk(std::span<const std::uint32_t> moduli, std::uint32_t prime, double epsilon) {
  const StrongProductGenerator base(std::vector<std::uint32_t>(moduli.begin(), moduli.end()), prime);
  const MargulisExpander graph = MargulisExpander::covering(base.seed_count());
  const double domain = static_cast<double>(domain_size(moduli));
  const double vertices = static_cast<double>(graph.vertex_count());
  const auto vertex_bits = static_cast<unsigned>(std::bit_width(graph.vertex_count() - 1));
  WalkChoice out;
  for (unsigned l = 1;; ++l) {
    const unsigned bits = vertex_bits + 3 * (l - 1) + l;
    const double cost = domain * (domain * static_cast<double>(moduli.size()) + vertices * 8.0 * l);
    if (bits > kMaxSeedBits || cost > std::ldexp(1.0, kMaxAuditLog2)) break;
    out.max_length = l;
  }
  if (out.max_length == 0) return out;
  const auto tables = walk_character_tables(base, graph, out.max_length);
  for (unsigned l = 1; l <= out.max_length; ++l) {
    double bias = 0.0;
    for (std::size_t idx = 1; idx < tables[l - 1].size(); ++idx) bias = std::max(bias, std::abs(tables[l - 1][idx]));
    out.best_bias = std::min(out.best_bias, bias);
    if (bias <= epsilon) {
      out.walk_length = l;
      out.seed_bits = vertex_bits + 4 * l - 3;
      break;
    }
  }
  return out;
}

}  // namespace detail

/// An epsilon-biased space over R[s_1+1] x ... x R[s_k+1].
///
/// Unless construction is forced, domains of at most 2^20 points get the
/// exhaustive (0-biased) space. Otherwise the walk length is the shortest
/// whose exact character table has bias <= epsilon, searched up to the 40
/// seed bit and 2^32 audit-cost limits; among candidate primes the one
/// needing the fewest seed bits wins.
inline ComplexSampleSpace build_complex_space(std::vector<std::uint32_t> moduli, double epsilon,
                                              ComplexBuildOptions options = {}) {
  if (moduli.empty()) throw DomainError("need at least one coordinate");
  for (std::uint32_t m : moduli)
    if (m < 2) throw DomainError("moduli must be at least 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (!options.force_construction && domain_size(moduli) <= kComplexFallbackMaxDomain) {
    return exhaustive_complex_space(std::move(moduli), epsilon);
  }

  std::vector<std::uint32_t> primes;
  if (options.prime) {
    primes.push_back(options.prime);
  } else {
    // Larger primes make the reduction mod s_i+1 more uniform but grow the
    // walk graph; beyond the smallest one, only small base spaces are tried.
    const std::uint32_t first = strong_product_prime(moduli);
    primes.push_back(first);
    for (std::uint32_t p = smallest_prime_above(first); p <= 17; p = smallest_prime_above(p)) {
      if (StrongProductGenerator(moduli, p).seed_count() > (std::uint64_t{1} << 16)) break;
      primes.push_back(p);
    }
  }

  std::uint32_t chosen = 0;
  detail::WalkChoice best;
  double best_bias = 1.0;
  for (const std::uint32_t p : primes) {
    const detail::WalkChoice w = detail::shortest_walk(moduli, p, epsilon);
    best_bias = std::min(best_bias, w.best_bias);
    if (w.walk_length && (!chosen || w.seed_bits < best.seed_bits)) {
      chosen = p;
      best = w;
    }
  }
  if (!chosen) {
    throw CapacityError("complex space: no construction within 40 seed bits reaches bias " +
                        detail::format_eps(epsilon) + " (best " + detail::format_eps(best_bias) + ")");
  }
  ComplexSampleSpace out = complex_space_with_walk(std::move(moduli), best.walk_length, epsilon, chosen);
  out.tail_exponent = reference_tail_exponent();
  out.analytic_walk_length = analytic_walk_length(epsilon, out.strong_fraction, out.tail_exponent);
  return out;
}

}  // namespace permest
