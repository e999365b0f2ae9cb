// Acceptance checks against reference values; one line per criterion.
// Reference values are compared literally. Where an independent computation
// disagrees with a printed value the line fails and says where.

#include <chrono>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "bianchi/pipeline.hpp"
#include "bianchi/rigidity.hpp"

using namespace bianchi;

namespace {

// pinned limits
constexpr double kCrit5Seconds = 300;
constexpr double kCrit7Seconds = 120;
constexpr int kPlantedTrials = 100;
constexpr int kMonotoneSeries = 50;
constexpr long kCensusNorm = 150;
constexpr long kCuspNorm = 200;
constexpr long kEisNorm = 500;

IQInt w(long a, long b) { return IQInt(a, b); }
std::string key(const IQInt& l) { return l.canonical().str(); }

const IQInt pi = w(1, 1), pib = w(1, -1);

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;
    void fail(const std::string& s) {
        pass = false;
        details.push_back(s);
    }
    void note(const std::string& s) { details.push_back(s); }
};

double now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// (c1, c2) exponents of the column labels used by the tables
std::pair<int, int> cond_exps(const std::string& c) {
    static const std::map<std::string, std::pair<int, int>> m{
        {"1", {0, 0}}, {"π", {1, 0}}, {"π̄", {0, 1}}, {"π²", {2, 0}}, {"π̄²", {0, 2}},
        {"3", {1, 1}}, {"3π", {2, 1}}, {"3π̄", {1, 2}}, {"9", {2, 2}}};
    return m.at(c);
}

// new dimension summed over characters of exactly this conductor; -1 when
// the conductor does not divide the level
long cell(DimensionTable& T, const Ideal& D, int c1, int c2, long CellDims::*field = &CellDims::new_full) {
    auto [a, b] = T.p_exps(D);
    if (c1 > a || c2 > b) return -1;
    long v = 0;
    for (auto& o : T.orbits())
        if (o.c1 == c1 && o.c2 == c2) v += T.dims(D, o).*field * o.size;
    return v;
}

std::string show(long v) { return v < 0 ? "-" : std::to_string(v); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Outcome out;
    IQInt N = w(3, -2);
    DimensionTable T(Ideal(N), 3, 2);
    const std::vector<std::string> cols{"1", "π", "π̄", "π²", "π̄²", "3", "3π", "3π̄", "9"};
    struct Row {
        std::string label;
        IQInt level;
        std::vector<long> ref;  // -1 for "-"
        bool stretch;
    };
    std::vector<Row> rows{
        {"Γ₀(N)∩Γ₁(π)", N * pi, {1, 0, -1, -1, -1, -1, -1, -1, -1}, false},
        {"Γ₀(N)∩Γ₁(3)", N * 3, {0, 0, 0, -1, -1, 0, -1, -1, -1}, false},
        {"Γ₀(N)∩Γ₁(π²)", N * pi * pi, {1, 0, -1, 0, -1, -1, -1, -1, -1}, false},
        {"Γ₀(N)∩Γ₁(π̄²)", N * pib * pib, {0, -1, 0, -1, 0, -1, -1, -1, -1}, false},
        {"Γ₀(N)∩Γ₁(3π)", N * pi * pi * pib, {0, 0, 0, 8, -1, 0, 0, -1, -1}, false},
        // the printed row has 0 under π², which does not divide 3π̄
        {"Γ₀(N)∩Γ₁(3π̄)", N * pi * pib * pib, {3, 0, 0, 0, 6, 0, -1, 0, -1}, false},
        {"Γ₁(9)", w(9, 0), {0, 0, 0, 0, 0, 4, 0, 0, 20}, true},
        {"Γ₀(N)∩Γ₁(9)", N * 9, {6, 0, 0, 8, 6, 0, 0, 0, 0}, true},
    };
    int stretch_bad = 0;
    for (auto& r : rows) {
        Ideal D(r.level);
        for (size_t c = 0; c < cols.size(); ++c) {
            auto [c1, c2] = cond_exps(cols[c]);
            long got = cell(T, D, c1, c2);
            long want = r.ref[c];
            // an empty sum is zero: "-" and 0 agree when the conductor does not divide the level
            bool same = got == want || (got == -1 && want == 0);
            if (same) continue;
            std::string msg = r.label + " cond " + cols[c] + ": computed " + show(got) + ", printed " + show(want);
            if (r.stretch) {
                ++stretch_bad;
                out.note("stretch " + msg);
            } else
                out.fail(msg);
        }
    }
    if (!stretch_bad) out.note("stretch rows Γ₁(9), Γ₀(N)∩Γ₁(9) match");
    return out;
}

// number of points on y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over O/l,
// l of prime norm q; returns a_l = q - #affine
long ec_trace(const std::array<IQInt, 5>& a, const IQInt& l) {
    long q = l.norm().get_si();
    // theta = -a b^-1 mod l for l = a + b theta
    long la = l.a_long(), lb = l.b_long();
    auto md = [q](long x) { return ((x % q) + q) % q; };
    long th;
    if (lb % q == 0)
        throw std::logic_error("not a degree one prime");
    else {
        long inv = 1;
        for (long e = q - 2, b = md(lb); e; e >>= 1, b = b * b % q)
            if (e & 1) inv = inv * b % q;
        th = md(-la * inv);
    }
    long c[5];
    for (int i = 0; i < 5; ++i) c[i] = md(a[i].a_long() + a[i].b_long() * th);
    long cnt = 0;
    for (long x = 0; x < q; ++x)
        for (long y = 0; y < q; ++y) {
            long lhs = md(y * y + c[0] * x % q * y + c[2] * y);
            long rhs = md(x * x % q * x + c[1] * x % q * x + c[3] * x + c[4]);
            cnt += lhs == rhs;
        }
    return q - cnt;
}

CycScalar z3(const CycField* K, long c0, long c1) {
    CycScalar s(K);
    s[0] = c0;
    s[1] = c1;
    return s;
}

Outcome criterion2() {
    Outcome out;
    IQInt N = w(3, -2);
    // Gamma_0(N pi): printed row over theta, 1-theta, 3+theta, 3-theta, 3+2theta, 1+3theta, 1-3theta
    std::vector<IQInt> ls{w(0, 1), w(1, -1), w(3, 1), w(3, -1), w(3, 2), w(1, 3), w(1, -3)};
    std::vector<long> printed{-2, -2, -4, -2, -6, -4, 0};
    auto seed = seed_data(example_families()[0]);
    std::map<std::string, long> comp = seed.a;
    // T at 1-theta is the eigenvalue at the prime above p not dividing the level
    comp[key(w(1, -1))] = std::stol(seed.local.at(key(w(1, -1))));
    for (size_t i = 0; i < ls.size(); ++i)
        if (comp.at(key(ls[i])) != printed[i])
            out.fail("Γ₀(Nπ) a(" + ls[i].str() + "): computed " + std::to_string(comp.at(key(ls[i]))) + ", printed " +
                     std::to_string(printed[i]));
    // independent route: the elliptic curve y^2 + theta xy + y = x^3 + (theta-1)x^2 - theta x
    std::array<IQInt, 5> E{w(0, 1), w(-1, 1), w(1, 0), w(0, -1), w(0, 0)};
    int ec_agree = 0;
    for (auto& l : ls) {
        long t = ec_trace(E, l);
        if (t == comp.at(key(l)))
            ++ec_agree;
        else
            out.fail("point count at " + l.str() + " gives " + std::to_string(t));
    }
    out.note("point counts on the curve agree with the computed eigenvalues at " + std::to_string(ec_agree) + "/7 primes");

    // conductor pibar^2 orbits at Gamma_0(N) ∩ Gamma_1(3 pibar), plus part
    Modulus M{Ideal(N * pi * pib * pib)};
    std::vector<IQInt> ls2{w(0, 1), w(3, 1), w(3, -1), w(3, 2), w(1, 3), w(1, -3)};
    std::vector<std::string> keys;
    for (auto& l : ls2) keys.push_back(key(l));
    const CycField* K3 = CycField::get(3, 0);
    // printed rows as c0 + c1 zeta_3
    std::vector<std::vector<std::pair<long, long>>> rows{
        {{0, 2}, {-5, -5}, {-4, 0}, {6, 6}, {0, 0}, {0, -2}},
        {{0, 1}, {0, -4}, {5, 0}, {0, 0}, {0, 6}, {-7, -7}},
        {{0, 0}, {3, 3}, {0, 0}, {-6, -6}, {8, 8}, {0, -2}},
    };
    std::vector<std::map<std::string, CycScalar>> systems;
    for (auto& eps : M.characters()) {
        if (!(eps.conductor() == Ideal(pib * pib))) continue;
        SubspaceSpec spec;
        spec.part = Part::CuspPlus;
        spec.new_only = true;
        spec.sep = {w(0, 1), w(3, 1), w(3, -1)};
        auto X = exact_operators(M, eps, spec, ls2);
        if (!X.dim) continue;
        for (auto& e : eigensystems(X, keys))
            if (e.recognized && X.K->n() == 3) systems.push_back(e.values);
    }
    auto norm2 = [](const CycScalar& s) -> mpq_class { return s[0] * s[0] - s[0] * s[1] + s[1] * s[1]; };
    int literal = 0, up_to_units = 0;
    for (auto& r : rows) {
        bool lit = false, mod = false;
        for (auto& s : systems)
            for (long g : {1L, 2L}) {
                bool all = true, absval = true;
                for (size_t i = 0; i < keys.size(); ++i) {
                    CycScalar want = z3(K3, r[i].first, r[i].second).galois(g);
                    if (s.at(keys[i]) != want) all = false;
                    // 1+3theta and 1-3theta exchanged
                    size_t j = i == 4 ? 5 : i == 5 ? 4 : i;
                    if (norm2(s.at(keys[j])) != norm2(want)) absval = false;
                }
                lit |= all;
                mod |= absval;
            }
        literal += lit;
        up_to_units += mod;
    }
    if (systems.size() != 6) out.fail("expected 6 conductor-π̄² eigensystems, found " + std::to_string(systems.size()));
    if (literal != 3)
        out.fail("conductor π̄²: " + std::to_string(literal) + "/3 printed orbits match up to Galois conjugation; " +
                 std::to_string(up_to_units) + "/3 match in absolute value with the 1±3θ columns exchanged");

    // f2 in the T_{3+theta} char poly on the conductor pi^2 new space
    Modulus M2{Ideal(N * pi * pi * pib)};
    int found = 0, spaces = 0;
    for (auto& eps : M2.characters()) {
        if (!(eps.conductor() == Ideal(pi * pi)) || eps.sign() != 1) continue;
        SubspaceSpec spec;
        spec.part = Part::CuspPlus;
        spec.new_only = true;
        spec.sep = {w(0, 1), w(3, 1), w(3, -1)};
        auto X = exact_operators(M2, eps, spec, {w(3, 1)});
        if (!X.dim) continue;
        ++spaces;
        auto cp = X.charpoly(key(w(3, 1)));
        std::vector<CycScalar> f2{CycScalar(X.K, -9), CycScalar(X.K, 31), CycScalar(X.K, -11), CycScalar(X.K, 1)};
        if (cp == f2) ++found;
    }
    if (found != spaces || !found)
        out.fail("f₂ is the T_{3+θ} char poly on " + std::to_string(found) + "/" + std::to_string(spaces) + " spaces");
    else
        out.note("f₂ = x³-11x²+31x-9 is the T_{3+θ} char poly on each of the " + std::to_string(spaces) +
                 " conductor-π² spaces");
    return out;
}

Outcome criterion3() {
    Outcome out;
    struct Row {
        IQInt level;
        int plus, minus;
        bool ordinary;
    };
    std::vector<Row> rows{
        {w(6, 0), 0, 1, true},   {w(7, 1), 1, 0, true},   {w(2, 5), 1, 1, false},  {w(8, 1), 0, 1, true},
        {w(0, 6), 1, 0, true},   {w(5, 5), 0, 1, true},   {w(9, 3), 1, 0, true},   {w(6, 6), 1, 0, false},
        {w(4, 7), 1, 1, true},   {w(11, 1), 0, 1, true},  {w(11, 2), 0, 2, true},
    };
    std::set<std::string> listed;
    for (auto& r : rows) {
        listed.insert(Ideal(r.level).str());
        listed.insert(Ideal(r.level.conj()).str());
        auto C = newform_census(r.level, 3);
        std::string lv = r.level.str();
        if (C.plus != r.plus || C.minus != r.minus)
            out.fail(lv + ": signs (" + std::to_string(C.plus) + "," + std::to_string(C.minus) + "), printed (" +
                     std::to_string(r.plus) + "," + std::to_string(r.minus) + ")");
        bool all_rational = true, ord = true;
        for (auto& f : C.forms) {
            all_rational &= f.rational;
            ord &= f.ordinary_at_level == Ordinarity::Ordinary;
        }
        if (!all_rational) out.fail(lv + ": a newform is not rational");
        if (ord != r.ordinary) out.fail(lv + ": ordinary at the primes above 3 in the level " + (ord ? "yes" : "no"));
    }
    // completeness of the printed list is outside the criterion; reported only
    int others = 0;
    std::string extra;
    for (const Ideal& I : ideals_up_to(kCensusNorm)) {
        if (I.norm_long() % 3 || listed.count(I.str())) continue;
        auto C = newform_census(I.gen, 3);
        ++others;
        if (C.plus + C.minus)
            extra += " " + I.str() + " (" + std::to_string(C.plus) + "," + std::to_string(C.minus) + ")";
    }
    out.note("11 listed levels checked; " + std::to_string(others) + " unlisted levels of norm <= 150 with 3 | norm");
    if (!extra.empty()) out.note("unlisted levels carrying newforms:" + extra);
    return out;
}

Outcome criterion4() {
    Outcome out;
    auto check = [&](DimensionTable& T, const std::string& tab, const std::string& lbl, const IQInt& level,
                     const std::string& c, long want, long CellDims::*field = &CellDims::new_full) {
        auto [c1, c2] = cond_exps(c);
        long got = cell(T, Ideal(level), c1, c2, field);
        if (got != want)
            out.fail(tab + " " + lbl + " cond " + c + ": computed " + show(got) + ", printed " + std::to_string(want));
    };
    // the printed conductor labels fit tame level 3-theta; at 3+theta they are conjugated
    IQInt N = w(3, -1);
    {
        DimensionTable T(Ideal(N), 3, 2);
        check(T, "N=3-θ", "Γ₁(9)", w(9, 0), "3", 4);
        check(T, "N=3-θ", "Γ₁(9)", w(9, 0), "9", 20);
        check(T, "N=3-θ", "Γ₀(N)∩Γ₁(3)", N * 3, "1", 1);
        check(T, "N=3-θ", "Γ₀(N)∩Γ₁(π²)", N * pi * pi, "π²", 2);
        check(T, "N=3-θ", "Γ₀(N)∩Γ₁(9)", N * 9, "π²", 2);
        // both lie in the minus part
        check(T, "N=3-θ", "Γ₀(N)∩Γ₁(π²) plus", N * pi * pi, "π²", 0, &CellDims::new_plus);
        DimensionTable Tc(Ideal(N.conj()), 3, 2);
        if (cell(Tc, Ideal(N.conj() * pi * pi), 2, 0) != 0 || cell(Tc, Ideal(N.conj() * pib * pib), 0, 2) != 2)
            out.fail("dims at 3+θ are not the conjugate of those at 3-θ");
    }
    // theta (1 - 3 theta) = 6 + theta
    IQInt th = w(0, 1), q = w(1, -3), M = th * q;
    {
        DimensionTable T(Ideal(M), 3, 2);
        check(T, "N=θ(1-3θ)", "Γ₀(N)", M, "1", 1);
        check(T, "N=θ(1-3θ)", "Γ₁(9)", w(9, 0), "3", 4);
        check(T, "N=θ(1-3θ)", "Γ₁(9)", w(9, 0), "9", 20);
        check(T, "N=θ(1-3θ)", "Γ₀(θ)∩Γ₁(9)", th * 9, "9", 4);
        check(T, "N=θ(1-3θ)", "Γ₀(1-3θ)∩Γ₁(3)", q * 3, "1", 1);
        check(T, "N=θ(1-3θ)", "Γ₀(N)∩Γ₁(π)", M * pi, "1", 2);
        check(T, "N=θ(1-3θ)", "Γ₀(1-3θ)∩Γ₁(3π)", q * pi * pi * pib, "π²", 2);
        check(T, "N=θ(1-3θ)", "Γ₀(1-3θ)∩Γ₁(3π̄)", q * pi * pib * pib, "π̄²", 2);
        check(T, "N=θ(1-3θ)", "Γ₀(N)∩Γ₁(3π)", M * pi * pi * pib, "π²", 4);
        check(T, "N=θ(1-3θ)", "Γ₀(N)∩Γ₁(3π̄)", M * pi * pib * pib, "π̄²", 2);
    }
    // third family: the seed at Gamma_0(N pi)
    auto seed = seed_data(example_families()[2]);
    std::vector<IQInt> ls{w(3, -1), w(3, 1), w(3, -2), w(3, 2), w(1, 3)};
    std::vector<long> want{4, 4, -6, -2, 0};
    for (size_t i = 0; i < ls.size(); ++i)
        if (seed.a.at(key(ls[i])) != want[i])
            out.fail("third seed a(" + ls[i].str() + "): computed " + std::to_string(seed.a.at(key(ls[i]))) + ", printed " +
                     std::to_string(want[i]));
    return out;
}

Outcome criterion5() {
    Outcome out;
    double t0 = now();
    long checked = 0, bad = 0;
    for (const Ideal& I : ideals_up_to(kCuspNorm)) {
        if (I.is_unit()) continue;
        Modulus M(I);
        std::vector<std::vector<long>> Hs = {subgroup_full(M), subgroup_pm1(M), subgroup_trivial(M)};
        auto chars = M.characters();
        Hs.push_back(subgroup_kernel(chars.back()));
        for (auto& H : Hs) {
            ++checked;
            long a = cusp_count(M, H), b = cusp_count_brute(M, H);
            if (a != b) {
                ++bad;
                out.fail("cusps at " + I.str() + ": " + std::to_string(a) + " vs " + std::to_string(b));
            }
        }
    }
    long eis = 0;
    for (const Ideal& I : ideals_up_to(kEisNorm)) {
        if (I.is_unit()) continue;
        for (const Ideal& f : I.divisors())
            for (int k : {0, 2}) {
                ++eis;
                if (eisenstein_sum(I, f, k) != eisenstein_product(I, f, k)) {
                    ++bad;
                    out.fail("Eisenstein at " + I.str() + " cond " + f.str());
                }
            }
    }
    double dt = now() - t0;
    if (dt > kCrit5Seconds) out.fail("took " + std::to_string(dt) + " s");
    out.note(std::to_string(checked) + " cusp counts, " + std::to_string(eis) + " Eisenstein comparisons, " +
             std::to_string(bad) + " mismatches");
    return out;
}

Outcome criterion6() {
    Outcome out;
    IQInt N = w(3, -2);
    std::vector<IQInt> levels{w(7, 1), w(11, 2), N * pi * pib, N * pi * pi * pib, w(6, 1) * pi, w(3, -1) * pi * pi};
    int spaces = 0;
    for (auto& lv : levels) {
        Modulus M{Ideal(lv)};
        std::vector<IQInt> good, bad;
        for (auto& l : primes_up_to(20))
            (lv.divisible_by(l) ? bad : good).push_back(l);
        for (auto& eps : M.characters()) {
            if (eps.sign() != 1) continue;
            if (eps.order() > 6) continue;
            Embedding E = make_embedding(embedding_primes(1, eps.order(), 0)[0], eps.order(), 0);
            ProjLine P(M);
            HeckeSpace S(P, eps, E);
            if (!S.dim()) continue;
            ++spaces;
            const Fp& F = E.F;
            std::vector<const ModMat*> ops;
            try {
                for (auto& l : good) ops.push_back(&S.op(l));
                for (auto& l : bad) ops.push_back(&S.op(l));
            } catch (const std::exception& e) {
                out.fail(lv.str() + " " + eps.str() + ": " + e.what());
                continue;
            }
            const ModMat& J = S.J();
            for (size_t i = 0; i < ops.size(); ++i) {
                if (!(mul(F, *ops[i], J) == mul(F, J, *ops[i]))) out.fail(lv.str() + ": J does not commute");
                for (size_t j = i + 1; j < ops.size(); ++j)
                    if (!(mul(F, *ops[i], *ops[j]) == mul(F, *ops[j], *ops[i])))
                        out.fail(lv.str() + " " + eps.str() + ": operators do not commute");
            }
            if (!(mul(F, J, J) == ModMat::identity(S.dim()))) out.fail(lv.str() + ": J^2 != 1");
            // eigensystems outside the Ramanujan bound are exactly the Eisenstein ones
            IQInt l;
            for (auto& g : good)
                if (g.norm() >= 11) {
                    l = g;
                    break;
                }
            SubspaceSpec spec;
            spec.part = Part::Full;
            auto X = exact_operators(M, eps, spec, {l});
            long eis = eisenstein_dim(eps, 0);
            for (int v : ramanujan_violations(X.charpoly(key(l)), l))
                if (v != eis)
                    out.fail(lv.str() + " " + eps.str() + ": " + std::to_string(v) + " violations, Eisenstein dim " +
                             std::to_string(eis));
        }
    }
    out.note(std::to_string(spaces) + " spaces");
    return out;
}

Outcome criterion7() {
    Outcome out;
    const long p = 3;
    double t0 = now();
    std::mt19937_64 rng(20240917);
    const CycRing* O = CycRing::get(p, 3);
    auto ex = [&](long v) { return PadicInt::exact(p, v); };
    int recovered = 0;
    for (int t = 0; t < kPlantedTrials; ++t) {
        int m = t % 4;
        long q = ppow(p, m).get_si();
        long a = 0;
        if (m) do a = (long)(rng() % q);
            while (a % p == 0);
        long N = 2 + (long)(rng() % 9);
        PSeries2 f = PSeries2::translate(p, 32, 60, ex(N), m, a, 3) *
                     PSeries2::random_unit_poly(O, 32, 60, 30 - (int)N, rng);
        auto d = detect_translate(f, 3);
        bool ok = d.hit && d.hit->N.signed_value() == N && d.hit->m == m && d.hit->a == a &&
                  !torus_substitute(f, ex(N + 1), m, a).zero;
        recovered += ok;
    }
    if (recovered != kPlantedTrials)
        out.fail("planted translates recovered " + std::to_string(recovered) + "/" + std::to_string(kPlantedTrials));

    double t_planted = now() - t0;
    auto poly = [&](std::initializer_list<std::tuple<int, int, long>> terms) {
        PSeries2 f = PSeries2::zp(p, 32, 60);
        for (auto& [i, j, c] : terms) f.set(i, j, c);
        return f;
    };
    if (classify(poly({{1, 0, 1}, {0, 1, -1}})).shape != Shape::Diagonal) out.fail("X-Y is not diagonal");
    for (long N : {2L, 3L, 4L, 5L, 6L, 7L, 8L, 9L, 1 + p}) {
        auto c = classify(PSeries2::translate(p, 32, 60, ex(N), 0, 0));
        if (c.shape != Shape::TorusTranslate || c.translate->N.signed_value() != N)
            out.fail("(X+1)^" + std::to_string(N) + "-(Y+1) not classified as a translate with N = " + std::to_string(N));
    }

    double t_shapes = now() - t0 - t_planted;
    // precision monotonicity: determinate answers at (D, M) persist at (32, 60)
    int flips = 0, determinate = 0;
    const std::vector<std::pair<int, int>> lower{{16, 30}, {24, 45}};
    const std::vector<ClassicalPoint> pts{{0, 1, 1, 1, 2}, {0, 2, 1, 2, 4}, {1, 2, 2, 1, 1}, {2, 1, 1, 0, 0}};
    for (int t = 0; t < kMonotoneSeries; ++t) {
        const CycRing* Z = CycRing::get(p, 0);
        PSeries2 f;
        long N = 2 + (long)(rng() % 5);
        if (t % 2 == 0)
            f = PSeries2::random(Z, 32, 60, rng);
        else {
            // planted translate times a unit series
            PSeries2 u = PSeries2::random(Z, 32, 60, rng);
            u.at(0, 0) = CycPadic(Z, ex(1));
            f = PSeries2::translate(p, 32, 60, ex(N), 0, 0) * u;
        }
        std::vector<PVal> hi;
        for (auto& pt : pts) hi.push_back(eval_special(f, pt));
        bool hi_zero = torus_substitute(f, ex(N), 0, 0).zero;
        for (auto [D, M] : lower) {
            PSeries2 g = f.truncated(D, M);
            for (size_t i = 0; i < pts.size(); ++i) {
                PVal lo = eval_special(g, pts[i]);
                if (!lo.determinate()) {
                    // a lower bound may not exceed the later exact value
                    if (hi[i].kind == PVal::Finite && hi[i].v < lo.v) ++flips;
                    continue;
                }
                ++determinate;
                if (!(lo == hi[i])) ++flips;
            }
            // a determinate non-vanishing of H at low precision stays non-vanishing
            if (!torus_substitute(g, ex(N), 0, 0).zero && hi_zero) ++flips;
        }
    }
    if (flips) out.fail(std::to_string(flips) + " precision flips");
    double dt = now() - t0;
    if (dt > kCrit7Seconds) out.fail("took " + std::to_string((int)dt) + " s, limit " + std::to_string((int)kCrit7Seconds));
    out.note(std::to_string(recovered) + "/" + std::to_string(kPlantedTrials) + " planted, " +
             std::to_string(determinate) + " determinate low-precision values; " + std::to_string((int)t_planted) +
             " s planted, " + std::to_string((int)t_shapes) + " s shapes, " +
             std::to_string((int)(dt - t_planted - t_shapes)) + " s monotonicity");
    return out;
}

Outcome criterion8() {
    Outcome out;
    auto fams = example_families();
    RunOptions opt;
    // depth 1 already holds every cell up to Gamma_0(N) ∩ Gamma_1(9), the range of the reference tables
    opt.max_depth = 1;
    if (const char* b = std::getenv("BIANCHI_BUDGET")) opt.budget_seconds = std::atof(b);
    std::vector<std::string> expect{"FINITE_CLASSICAL_POINTS", "FINITE_CLASSICAL_POINTS", "FINITE_CLASSICAL_POINTS",
                                    "DIAGONAL_SUSPECT"};
    for (size_t i = 0; i < fams.size(); ++i) {
        auto R = run_family(fams[i], opt);
        std::string tag = fams[i].name + " " + R.verdict;
        if (R.verdict != expect[i]) {
            std::string why;
            for (auto& d : R.depths)
                for (auto& c : d.candidates)
                    if (c.status == "survivor" || c.status == "not computed (budget)")
                        why += " " + c.status + " at " + c.level_label + " cond " + c.cond_label + " (depth " +
                               std::to_string(d.depth) + ");";
            out.fail(tag + ", expected " + expect[i] + ":" + why);
            continue;
        }
        // eliminations carry their witnesses
        int elim = 0;
        for (auto& d : R.depths)
            for (auto& c : d.candidates) {
                if (c.status.rfind("eliminated", 0) != 0) continue;
                ++elim;
                bool has = !c.cong.witness.empty();
                if (c.status == "eliminated: J-sign") has = true;
                // the char poly prefilter records the operator without a root mod p in its notes
                if (c.status == "eliminated: char poly mod p")
                    for (auto& n : c.cong.notes)
                        if (n.rfind("char poly of ", 0) == 0 && n.find("has no root") != std::string::npos) has = true;
                if (!has) out.fail(tag + ": no witness at " + c.level_label + " (" + c.status + ")");
            }
        out.note(tag + " (" + std::to_string(elim) + " eliminated cells)");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::pair<std::string, std::function<Outcome()>>> crit{
        {"new dimensions, N = 3-2θ", criterion1},
        {"eigensystems at Γ₀(Nπ), Nπ̄², and f₂", criterion2},
        {"newform census, norm <= 150", criterion3},
        {"dimensions at 3-θ and θ(1-3θ), third seed", criterion4},
        {"cusp and Eisenstein formula cross-validation", criterion5},
        {"structural Hecke properties", criterion6},
        {"rigidity property suite", criterion7},
        {"end-to-end family runs", criterion8},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (size_t i = 0; i < crit.size(); ++i) {
        if (!only.empty() && !only.count((int)i + 1)) continue;
        double t0 = now();
        Outcome o;
        try {
            o = crit[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::ostringstream line;
        line << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << crit[i].first << "  ["
             << (int)(now() - t0) << " s]";
        for (auto& d : o.details) line << "\n    " << d;
        std::cout << line.str() << std::endl;
    }
    return failed ? 1 : 0;
}
