#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nsglue/rational.hpp"

namespace nsglue {

// Exact-rational bookkeeping for the exponents of the gluing scheme:
//   gamma = 1/r
//   kappa = 1/r - 1/2 + 3*gamma/p + 4*(1/2 - gamma)
//   beta  = kappa + a - gamma/2
//   alpha = beta + 1/8
struct ExponentParams {
    Rational a, r, p;
    Rational gamma, kappa, beta, alpha;
};

inline ExponentParams derive_exponents(const Rational& a, const Rational& r, const Rational& p) {
    if (!(r > Rational(1))) throw std::invalid_argument("exponent params: need r > 1");
    if (!(p > Rational(3))) throw std::invalid_argument("exponent params: need p > 3");
    if (!(a > Rational(0))) throw std::invalid_argument("exponent params: need a > 0");
    ExponentParams e;
    e.a = a;
    e.r = r;
    e.p = p;
    e.gamma = Rational(1) / r;
    const Rational half(1, 2);
    e.kappa = Rational(1) / r - half + Rational(3) * e.gamma / p + Rational(4) * (half - e.gamma);
    e.beta = e.kappa + a - e.gamma / Rational(2);
    e.alpha = e.beta + Rational(1, 8);
    return e;
}

enum class Relation { Greater, GreaterEq, Less, Equal };

struct LedgerEntry {
    std::string name;      // estimate identifier
    std::string anchor;    // neutral description of what the row encodes
    Rational lhs, rhs;
    Relation relation;
    Rational margin;       // signed slack; pass iff margin is positive (or zero for >=, ==)
    bool pass = false;
};

inline LedgerEntry make_entry(std::string name, std::string anchor, Rational lhs, Relation rel,
                              Rational rhs) {
    LedgerEntry e{std::move(name), std::move(anchor), lhs, rhs, rel, Rational(0), false};
    switch (rel) {
        case Relation::Greater:
            e.margin = lhs - rhs;
            e.pass = e.margin > Rational(0);
            break;
        case Relation::GreaterEq:
            e.margin = lhs - rhs;
            e.pass = e.margin >= Rational(0);
            break;
        case Relation::Less:
            e.margin = rhs - lhs;
            e.pass = e.margin > Rational(0);
            break;
        case Relation::Equal:
            e.margin = lhs - rhs;
            e.pass = e.margin == Rational(0);
            break;
    }
    return e;
}

inline std::vector<LedgerEntry> check_all(const ExponentParams& e) {
    const Rational one(1), two(2), three(3), half(1, 2);
    const Rational inv_r = one / e.r;
    const Rational inv_p = one / e.p;
    // Hoelder conjugate of 2r: (2r)' = 2r/(2r-1).
    const Rational conj_2r = (two * e.r) / (two * e.r - one);
    // Per-section auxiliary exponent: beta' + 1/2 - 3/(2p) - 1/r = beta.
    const Rational beta_prime = e.beta - half + three / (two * e.p) + inv_r;

    std::vector<LedgerEntry> rows;
    rows.push_back(make_entry("Go-identity", "outer source: norm exponent splits as gain over weight",
                              e.kappa + e.a, Relation::Equal, e.beta + e.gamma / two));
    rows.push_back(make_entry("Go-gain", "outer source: positive gain in final time", e.gamma / two,
                              Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Lo-condition", "outer linear terms: integrability of the kernel chain",
                              one - e.gamma - two * inv_r - three * e.gamma * inv_p,
                              Relation::GreaterEq, Rational(0)));
    rows.push_back(make_entry("Lo-gain-phi", "outer linear map, profile input: contraction gain",
                              e.gamma / two + (e.alpha - e.a), Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Lo-gain-psi", "outer linear map, outer input: contraction gain",
                              e.kappa + e.a, Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Bo-integrability", "outer bilinear term: time-integrable kernel power",
                              (half + three / (two * e.p)) * conj_2r, Relation::Less, one));
    rows.push_back(make_entry("Bo-gain", "outer bilinear term: combined gain in final time",
                              e.beta + inv_r, Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Gi-margin", "inner source: decay beats the norm weight",
                              two * e.a - e.alpha, Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Bi-aux", "inner bilinear term: auxiliary exponent positive",
                              beta_prime, Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Bi-gain", "inner bilinear term: contraction gain", e.beta,
                              Relation::Greater, Rational(0)));
    rows.push_back(make_entry("Li-margin", "inner linear map: fixed smoothing margin",
                              e.beta + Rational(1, 4) - e.alpha, Relation::Greater, Rational(0)));
    rows.push_back(make_entry("subcriticality", "mixed-norm space is subcritical for the equations",
                              two * inv_r + three * inv_p, Relation::Less, one));
    rows.push_back(make_entry("spectral-floor", "background growth rate large enough for the scheme",
                              e.a, Relation::GreaterEq, Rational(10)));
    return rows;
}

inline bool ledger_passes(const std::vector<LedgerEntry>& rows) {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

struct PredictedRate {
    std::string name;
    Rational rate;         // power of tbar (outer rows) or of e^{taubar} (inner rows)
    std::string anchor;
};

// Rates the verifier compares against measured log-log slopes.  Emission is
// blocked unless every ledger row passes.
inline std::vector<PredictedRate> predicted_rates(const ExponentParams& e) {
    auto rows = check_all(e);
    if (!ledger_passes(rows))
        throw std::runtime_error("predicted_rates: ledger has failing rows");
    const Rational two(2);
    std::vector<PredictedRate> t;
    t.push_back({"Go", e.gamma / two, "outer source Y-norm vs final time"});
    t.push_back({"Lo-phi", e.gamma / two + (e.alpha - e.a), "outer linear map gain, profile input"});
    t.push_back({"Lo-psi", e.kappa + e.a, "outer linear map gain, outer input"});
    t.push_back({"Bo", e.beta + Rational(1) / e.r, "outer bilinear Y-norm vs final time"});
    t.push_back({"Gi", two * e.a - e.alpha, "inner source X-norm vs final log-time"});
    t.push_back({"Bi", e.beta, "inner bilinear X-norm gain"});
    t.push_back({"Li", Rational(1, 8), "inner linear map margin"});
    return t;
}

}  // namespace nsglue
