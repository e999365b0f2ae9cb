#include "bianchi/hecke.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bianchi {

std::vector<Mat2> heilbronn_set(const IQInt& l) {
    long d = l.d();
    IQInt zero(0, 0, d), one(1, 0, d);
    std::vector<Mat2> out;
    out.push_back({one, zero, zero, l});
    ResidueRing R(l);
    for (long i = 0; i < R.size(); ++i) {
        IQInt r = euclid_divmod(R.element(i), l).second;
        IQInt x1 = l, x2 = -r, y1 = zero, y2 = one, a = -l, b = r;
        out.push_back({x1, x2, y1, y2});
        while (!b.is_zero()) {
            auto [q, c] = euclid_divmod(a, b);
            a = -b;
            b = c;
            IQInt x3 = q * x2 - x1;
            x1 = x2;
            x2 = x3;
            IQInt y3 = q * y2 - y1;
            y1 = y2;
            y2 = y3;
            out.push_back({x1, x2, y1, y2});
        }
    }
    return out;
}

std::vector<Mat2> coset_skeleton(const IQInt& l) {
    long d = l.d();
    IQInt zero(0, 0, d), one(1, 0, d);
    std::vector<Mat2> out;
    out.push_back({one, zero, zero, l});
    ResidueRing R(l);
    for (long i = 0; i < R.size(); ++i) {
        IQInt r = euclid_divmod(R.element(i), l).second;
        out.push_back({l, -r, zero, one});
    }
    return out;
}

const char* part_name(Part p) {
    switch (p) {
        case Part::Full: return "full";
        case Part::Cusp: return "cusp";
        case Part::CuspPlus: return "cusp+";
        case Part::CuspMinus: return "cusp-";
    }
    return "?";
}

int part_sign(Part p) {
    if (p == Part::CuspPlus) return 1;
    if (p == Part::CuspMinus) return -1;
    return 0;
}

namespace {

ModMat scalar_shift(const Fp& F, const ModMat& T, u64 a) {
    ModMat out = T;
    for (int i = 0; i < T.r; ++i) out.at(i, i) = F.sub(out.at(i, i), a);
    return out;
}

ModMat mat_pow(const Fp& F, ModMat A, int e) {
    ModMat R = ModMat::identity(A.r);
    while (e > 0) {
        if (e & 1) R = mul(F, R, A);
        e >>= 1;
        if (e) A = mul(F, A, A);
    }
    return R;
}

ModMat poly_eval(const Fp& F, const ModPoly& f, const ModMat& T) {
    ModMat R(T.r, T.c);
    for (size_t i = f.size(); i-- > 0;) {
        R = mul(F, R, T);
        for (int k = 0; k < T.r; ++k) R.at(k, k) = F.add(R.at(k, k), f[i]);
    }
    return R;
}

// a / b for monic b; throws if the division leaves a remainder
ModPoly poly_div_exact(const Fp& F, ModPoly a, ModPoly b) {
    poly_trim(a);
    poly_trim(b);
    if (b.empty()) throw std::domain_error("division by zero polynomial");
    if (a.size() < b.size()) {
        if (a.empty()) return {};
        throw std::runtime_error("old-form polynomial does not divide");
    }
    u64 inv = F.inv(b.back());
    ModPoly q(a.size() - b.size() + 1, 0);
    for (size_t i = q.size(); i-- > 0;) {
        u64 c = F.mul(a[i + b.size() - 1], inv);
        q[i] = c;
        for (size_t j = 0; j < b.size(); ++j) a[i + j] = F.sub(a[i + j], F.mul(c, b[j]));
    }
    poly_trim(a);
    if (!a.empty()) throw std::runtime_error("old-form polynomial does not divide");
    return q;
}

int count_divisors(const Ideal& I) { return (int)I.divisors().size(); }

std::string combo_key(const HeckeCombo& T) {
    std::string s;
    for (auto& [l, c] : T) s += l.str() + "*" + std::to_string(c) + ";";
    return s;
}

// first nonzero row of each column
std::vector<int> column_pivots(const ModMat& W) {
    std::vector<int> p(W.c, -1);
    for (int j = 0; j < W.c; ++j)
        for (int i = 0; i < W.r; ++i)
            if (W.at(i, j)) {
                p[j] = i;
                break;
            }
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------

HeckeSpace::HeckeSpace(const ProjLine& P, const DirichletChar& eps, const Embedding& E)
    : P_(&P), eps_(&eps), sp_(P, eps, E) {}

const ModMat& HeckeSpace::op(const IQInt& l) {
    std::string key = l.canonical().str();
    auto it = ops_.find(key);
    if (it != ops_.end()) return it->second;
    bool drop = modulus().ideal().gen.divisible_by(l);
    auto H = heilbronn_set(l);
    if (!sp_.preserves_relations(H, drop)) throw std::runtime_error("Hecke operator at " + l.str() + " does not respect the relations");
    return ops_[key] = sp_.op(H, drop);
}

const ModMat& HeckeSpace::J() {
    if (!J_) J_ = sp_.J();
    return *J_;
}

const ModMat& HeckeSpace::part(Part p) {
    auto it = parts_.find((int)p);
    if (it != parts_.end()) return it->second;
    const Fp& F = embedding().F;
    ModMat W;
    if (p == Part::Full) {
        W = ModMat::identity(dim());
    } else if (p == Part::Cusp) {
        W = canonical_basis(F, sp_.cusp_basis());
    } else {
        const ModMat& C = part(Part::Cusp);
        if (C.c == 0) {
            W = C;
        } else {
            ModMat Jc = restrict_to(F, J(), C);
            u64 s = p == Part::CuspPlus ? 1 : F.neg(1);
            ModMat K = kernel(F, scalar_shift(F, Jc, s));
            W = K.c ? canonical_basis(F, mul(F, C, K)) : ModMat(C.r, 0);
        }
    }
    return parts_[(int)p] = W;
}

// ---------------------------------------------------------------------------

struct LevelTower::Level {
    std::unique_ptr<Modulus> M;
    std::unique_ptr<ProjLine> P;
    DirichletChar eps;
    std::unique_ptr<HeckeSpace> S;
};

LevelTower::LevelTower(const Modulus& M, const DirichletChar& eps, const Embedding& E) : M_(&M), eps_(&eps), E_(E) {}
LevelTower::~LevelTower() = default;

std::vector<Ideal> LevelTower::levels() const {
    Ideal f = eps_->conductor();
    std::vector<Ideal> out;
    for (auto& D : M_->ideal().divisors())
        if (f.divides(D)) out.push_back(D);
    return out;
}

HeckeSpace& LevelTower::at(const Ideal& D) {
    std::string key = D.str();
    auto it = levels_.find(key);
    if (it != levels_.end()) return *it->second->S;
    if (!D.divides(M_->ideal()) || !eps_->conductor().divides(D)) throw std::invalid_argument("level outside the tower: " + key);
    auto L = std::make_unique<Level>();
    L->M = std::make_unique<Modulus>(D);
    L->P = std::make_unique<ProjLine>(*L->M);
    auto r = restrict_char(*eps_, *L->M);
    if (!r) throw std::runtime_error("character does not descend to " + key);
    L->eps = *r;
    L->S = std::make_unique<HeckeSpace>(*L->P, L->eps, E_);
    HeckeSpace& S = *L->S;
    levels_[key] = std::move(L);
    return S;
}

ModPoly LevelTower::new_charpoly(const Ideal& D, Part part, const HeckeCombo& T) {
    if (part == Part::Full) throw std::invalid_argument("new parts are only tracked inside the cuspidal space");
    std::string key = D.str() + "|" + part_name(part) + "|" + combo_key(T);
    auto it = cp_cache_.find(key);
    if (it != cp_cache_.end()) return it->second;
    const Fp& F = E_.F;
    HeckeSpace& S = at(D);
    const ModMat& W = S.part(part);
    ModMat A(S.dim(), S.dim());
    for (auto& [l, c] : T) {
        const ModMat& Tl = S.op(l);
        for (size_t i = 0; i < A.a.size(); ++i) A.a[i] = F.add(A.a[i], F.mul(c, Tl.a[i]));
    }
    ModPoly cp = charpoly(F, restrict_to(F, A, W));
    Ideal f = eps_->conductor();
    for (auto& E : D.divisors()) {
        if (E == D || !f.divides(E)) continue;
        ModPoly g = new_charpoly(E, part, T);
        int tau = count_divisors(D.quotient(E));
        for (int t = 0; t < tau; ++t) cp = poly_div_exact(F, cp, g);
    }
    return cp_cache_[key] = cp;
}

ModMat LevelTower::new_subspace(Part part, const std::vector<IQInt>& sep) {
    const Fp& F = E_.F;
    HeckeSpace& S = top();
    const ModMat& W = S.part(part);
    if (W.c == 0) return W;
    bool has_old = false;
    for (auto& D : levels())
        if (!(D == M_->ideal())) has_old = true;
    if (!has_old) return W;

    std::vector<HeckeCombo> combos;
    for (auto& l : sep) combos.push_back({{l, 1}});
    for (size_t i = 0; i < sep.size(); ++i)
        for (size_t j = i + 1; j < sep.size(); ++j)
            for (u64 c = 1; c <= 3; ++c) combos.push_back({{sep[i], 1}, {sep[j], c}});

    for (auto& T : combos) {
        ModPoly g = new_charpoly(M_->ideal(), part, T);
        poly_trim(g);
        if (g.size() <= 1) return ModMat(W.r, 0);
        ModMat A(S.dim(), S.dim());
        for (auto& [l, c] : T) {
            const ModMat& Tl = S.op(l);
            for (size_t i = 0; i < A.a.size(); ++i) A.a[i] = F.add(A.a[i], F.mul(c, Tl.a[i]));
        }
        ModMat Tw = restrict_to(F, A, W);
        ModPoly full = charpoly(F, Tw);
        ModPoly old = poly_div_exact(F, full, g);
        ModPoly h = poly_gcd(F, g, old);
        poly_trim(h);
        if (h.size() > 1) continue;
        ModMat K = kernel(F, poly_eval(F, g, Tw));
        if (K.c != (int)g.size() - 1) continue;
        return canonical_basis(F, mul(F, W, K));
    }
    throw std::runtime_error("could not separate the new part at " + M_->ideal().str() + " with the given operators");
}

// ---------------------------------------------------------------------------

ExactOperators exact_operators(const Modulus& M, const DirichletChar& eps, const SubspaceSpec& spec,
                               const std::vector<IQInt>& ls, bool with_J, int max_primes) {
    int n = eps.order();
    ExactOperators X;
    X.K = CycField::get(n, 0);
    X.level = M.ideal().str();
    X.character = eps.str();
    std::vector<std::string> keys;
    for (auto& l : ls) keys.push_back(l.canonical().str());
    if (with_J) keys.push_back("J");
    auto js = unit_residues(n);
    int phi = (int)js.size();
    auto qs = embedding_primes(max_primes, n, 0);
    std::vector<IQInt> sep = spec.sep.empty() ? ls : spec.sep;
    if (spec.new_only) {
        Ideal L = M.ideal();
        sep.erase(std::remove_if(sep.begin(), sep.end(), [&](const IQInt& l) { return L.gen.divisible_by(l); }), sep.end());
    }

    std::optional<CycReconstructor> rec;
    std::optional<std::vector<CycScalar>> prev;
    std::vector<long> ref_basis;
    std::vector<int> ref_piv;
    int dim = -1;
    for (u64 q : qs) {
        Fp F(q);
        u64 r = primitive_root_of_unity(F, (u64)n);
        // vals[entry][embedding]
        std::vector<std::vector<u64>> vals;
        bool consistent = true;
        for (int ji = 0; ji < phi && consistent; ++ji) {
            Embedding E = make_embedding(q, n, 0, js[ji]);
            LevelTower tower(M, eps, E);
            HeckeSpace& S = tower.top();
            ModMat W = spec.new_only ? tower.new_subspace(spec.part, sep) : S.part(spec.part);
            auto piv = column_pivots(W);
            if (dim < 0) {
                dim = W.c;
                ref_basis = S.symbols().basis();
                ref_piv = piv;
                X.dim = dim;
                if (dim == 0) break;
                rec.emplace(X.K, (int)keys.size() * dim * dim);
            }
            if (W.c != dim || piv != ref_piv || S.symbols().basis() != ref_basis) {
                consistent = false;
                break;
            }
            if (vals.empty()) vals.assign((size_t)keys.size() * dim * dim, std::vector<u64>(phi));
            for (size_t k = 0; k < keys.size(); ++k) {
                const ModMat& T = keys[k] == "J" ? S.J() : S.op(ls[k]);
                ModMat R = restrict_to(F, T, W);
                for (int e = 0; e < dim * dim; ++e) vals[k * dim * dim + e][ji] = R.a[e];
            }
        }
        if (dim == 0) {
            for (auto& k : keys) X.ops[k] = ExactMatrix(X.K, 0, 0);
            X.primes_used = 1;
            return X;
        }
        if (!consistent) continue;
        std::vector<u64> coords;
        coords.reserve(vals.size() * phi);
        for (auto& v : vals) {
            auto c = power_basis_coords(F, n, r, v);
            coords.insert(coords.end(), c.begin(), c.end());
        }
        rec->add(q, coords);
        auto res = rec->result();
        if (res && prev && *res == *prev) {
            X.primes_used = rec->nprimes();
            for (size_t k = 0; k < keys.size(); ++k) {
                ExactMatrix A(X.K, dim, dim);
                for (int e = 0; e < dim * dim; ++e) A.a[e] = (*res)[k * dim * dim + e];
                X.ops[keys[k]] = A;
            }
            return X;
        }
        prev = res;
    }
    throw std::runtime_error("exact Hecke operators did not stabilise at " + X.level);
}

// ---------------------------------------------------------------------------

std::optional<CycScalar> recognize(const CycField* K, const Fp& F, u64 zeta_img, u64 a) {
    const long lim = 1L << 28;
    if (K->d() != 0) return std::nullopt;
    if (K->phi() == 1) {
        i64 x = F.lift(a);
        if (std::llabs(x) > (1LL << 40)) return std::nullopt;
        return CycScalar(K, mpq_class((long)x));
    }
    if (K->phi() != 2) return std::nullopt;
    using i128 = __int128;
    i128 q = (i128)F.q;
    i128 b1x = q, b1y = 0, b2x = -(i128)F.lift(zeta_img), b2y = 1;
    auto dot = [](i128 ax, i128 ay, i128 bx, i128 by) { return ax * bx + ay * by; };
    // Lagrange-Gauss reduction
    for (int it = 0; it < 200; ++it) {
        if (dot(b1x, b1y, b1x, b1y) < dot(b2x, b2y, b2x, b2y)) {
            std::swap(b1x, b2x);
            std::swap(b1y, b2y);
        }
        i128 n2 = dot(b2x, b2y, b2x, b2y);
        long double mu = (long double)dot(b1x, b1y, b2x, b2y) / (long double)n2;
        i128 m = (i128)std::llround(mu);
        if (m == 0) break;
        b1x -= m * b2x;
        b1y -= m * b2y;
    }
    i128 tx = (i128)F.lift(a), ty = 0;
    i128 det = b1x * b2y - b1y * b2x;
    long double c1 = (long double)(tx * b2y - ty * b2x) / (long double)det;
    long double c2 = (long double)(b1x * ty - b1y * tx) / (long double)det;
    i128 k1 = std::llround(c1), k2 = std::llround(c2);
    i128 x = tx - k1 * b1x - k2 * b2x, y = ty - k1 * b1y - k2 * b2y;
    if (x > lim || x < -lim || y > lim || y < -lim) return std::nullopt;
    CycScalar s(K);
    s[0] = mpq_class((long)x);
    s[1] = mpq_class((long)y);
    return s;
}

bool is_root(const std::vector<CycScalar>& poly, const CycScalar& x) {
    if (poly.empty()) return true;
    CycScalar v(x.field());
    for (size_t i = poly.size(); i-- > 0;) v = v * x + poly[i];
    return v.is_zero();
}

std::vector<EigenSystem> eigensystems(const ExactOperators& X, const std::vector<std::string>& keys) {
    std::vector<EigenSystem> out;
    if (X.dim == 0) return out;
    int n = X.K->n();
    u64 q = choose_primes(1, (u64)n, 0, (u64(1) << 61) - 1)[0];
    Fp F(q);
    u64 r = primitive_root_of_unity(F, (u64)n);
    struct Block {
        ModMat W;
        std::map<std::string, u64> eig;
        bool split = true;
    };
    std::vector<Block> blocks{{ModMat::identity(X.dim), {}, true}};
    std::map<std::string, ModMat> red;
    for (auto& k : keys) red[k] = X.ops.at(k).reduce(F, r);
    for (auto& k : keys) {
        std::vector<Block> next;
        for (auto& B : blocks) {
            if (!B.split) {
                next.push_back(B);
                continue;
            }
            ModMat Tb = restrict_to(F, red[k], B.W);
            int b = Tb.r;
            auto roots = poly_roots(F, charpoly(F, Tb));
            int covered = 0;
            ModMat Q = ModMat::identity(b);
            for (u64 a : roots) {
                ModMat P = mat_pow(F, scalar_shift(F, Tb, a), b);
                Q = mul(F, Q, P);
                ModMat G = kernel(F, P);
                if (G.c == 0) continue;
                Block nb{mul(F, B.W, G), B.eig, true};
                nb.eig[k] = a;
                covered += G.c;
                next.push_back(nb);
            }
            if (covered < b) {
                ModMat I = canonical_basis(F, Q);
                next.push_back({mul(F, B.W, I), B.eig, false});
            }
        }
        blocks = std::move(next);
    }
    std::map<std::string, std::vector<CycScalar>> cps;
    for (auto& k : keys) cps[k] = X.charpoly(k);
    for (auto& B : blocks) {
        EigenSystem e;
        e.mult = B.W.c;
        e.split = B.split;
        e.images = B.eig;
        e.recognized = B.split;
        for (auto& [k, a] : B.eig) {
            auto v = recognize(X.K, F, r, a);
            if (v && is_root(cps[k], *v)) {
                e.values[k] = *v;
            } else {
                e.recognized = false;
            }
        }
        out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------

const long double kRamanujanTol = 1e-4L;

std::vector<std::complex<long double>> complex_roots(const std::vector<CycScalar>& poly, long j) {
    using C = std::complex<long double>;
    if (poly.empty()) return {};
    const CycField* K = poly[0].field();
    if (K->d() != 0) throw std::invalid_argument("complex_roots: only cyclotomic coefficients are supported");
    int n = K->n();
    const long double PI = 3.14159265358979323846264338327950288L;
    C z = std::polar(1.0L, 2 * PI * (long double)j / (long double)n);
    std::vector<C> c(poly.size());
    for (size_t i = 0; i < poly.size(); ++i) {
        C v = 0, zp = 1;
        for (int t = 0; t < K->phi(); ++t) {
            v += (long double)poly[i][t].get_d() * zp;
            zp *= z;
        }
        c[i] = v;
    }
    while (c.size() > 1 && std::abs(c.back()) == 0) c.pop_back();
    int m = (int)c.size() - 1;
    if (m <= 0) return {};
    for (auto& v : c) v /= c[m];
    c[m] = 1;
    long double R = 0;
    for (int i = 0; i < m; ++i) R = std::max(R, std::abs(c[i]));
    R += 1;
    auto eval = [&](C x, C& d) {
        C p = c[m];
        d = 0;
        for (int i = m - 1; i >= 0; --i) {
            d = d * x + p;
            p = p * x + c[i];
        }
        return p;
    };
    std::vector<C> zs(m);
    for (int k = 0; k < m; ++k) zs[k] = std::polar(R * 0.9L, 2 * PI * k / m + 0.4L);
    for (int it = 0; it < 2000; ++it) {
        long double step = 0;
        for (int k = 0; k < m; ++k) {
            C d;
            C p = eval(zs[k], d);
            if (std::abs(p) == 0) continue;
            C ratio = p / d;
            C s = 0;
            for (int i = 0; i < m; ++i)
                if (i != k) s += 1.0L / (zs[k] - zs[i]);
            C w = ratio / (1.0L - ratio * s);
            zs[k] -= w;
            step = std::max(step, std::abs(w) / (1 + std::abs(zs[k])));
        }
        if (step < 1e-17L) break;
    }
    return zs;
}

std::vector<int> ramanujan_violations(const std::vector<CycScalar>& charpoly, const IQInt& l) {
    std::vector<int> out;
    if (charpoly.size() <= 1) return out;
    long double bound = 2 * std::sqrt((long double)l.norm().get_d());
    int n = charpoly[0].field()->n();
    for (long j : unit_residues(n)) {
        int v = 0;
        for (auto& z : complex_roots(charpoly, j))
            if (std::abs(z) > bound * (1 + kRamanujanTol)) ++v;
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* ordinarity_name(Ordinarity o) {
    switch (o) {
        case Ordinarity::Ordinary: return "ordinary";
        case Ordinarity::NonOrdinary: return "non-ordinary";
        case Ordinarity::Undetermined: return "undetermined";
    }
    return "?";
}

bool ordinary_allowed(int level_exp, int cond_exp, int k) {
    if (level_exp == 0) return true;
    if (level_exp == cond_exp) return true;
    return level_exp == 1 && cond_exp == 0 && k == 0;
}

OrdinarityVerdict ordinarity(const std::vector<PrimeAboveP>& data, const ModpReduction& red, int k) {
    OrdinarityVerdict v;
    bool all_units = true, undetermined = false;
    for (auto& P : data) {
        std::string tag = P.prime.str();
        bool allowed = ordinary_allowed(P.level_exp, P.cond_exp, k);
        if (!P.eigenvalue) {
            if (allowed) {
                undetermined = true;
                v.notes.push_back(tag + ": eigenvalue missing");
            } else {
                all_units = false;
                v.notes.push_back(tag + ": local type excludes a unit eigenvalue");
            }
            continue;
        }
        bool unit;
        try {
            unit = reduce_scalar(*P.eigenvalue, red) != 0;
        } catch (const std::domain_error&) {
            unit = false;
            v.notes.push_back(tag + ": eigenvalue not integral at p");
        }
        const char* op = P.level_exp == 0 ? "T" : "U";
        if (!allowed) {
            all_units = false;
            v.notes.push_back(tag + ": local type excludes a unit eigenvalue" + std::string(unit ? " (but the computed eigenvalue is a unit)" : ""));
            continue;
        }
        v.notes.push_back(tag + ": " + op + " eigenvalue " + P.eigenvalue->pretty() + (unit ? " is a unit" : " is not a unit"));
        if (!unit) all_units = false;
    }
    if (!all_units)
        v.verdict = Ordinarity::NonOrdinary;
    else if (undetermined)
        v.verdict = Ordinarity::Undetermined;
    else
        v.verdict = Ordinarity::Ordinary;
    return v;
}

// ---------------------------------------------------------------------------
// p-local lattices

namespace {

using QVec = std::vector<mpq_class>;

int vp(mpz_class z, u64 p) {
    if (z == 0) return INT_MAX / 2;
    int v = 0;
    while (mpz_divisible_ui_p(z.get_mpz_t(), p)) {
        mpz_divexact_ui(z.get_mpz_t(), z.get_mpz_t(), p);
        ++v;
    }
    return v;
}

int vp(const mpq_class& x, u64 p) {
    if (x == 0) return INT_MAX / 2;
    return vp(x.get_num(), p) - vp(x.get_den(), p);
}

mpz_class strip(mpz_class z, u64 p) {
    z = abs(z);
    while (z != 0 && mpz_divisible_ui_p(z.get_mpz_t(), p)) mpz_divexact_ui(z.get_mpz_t(), z.get_mpz_t(), p);
    return z;
}

// rescale by a p-adic unit to keep entries small
void unit_normalize(QVec& v, u64 p) {
    mpz_class L = 1, G = 0;
    for (auto& x : v) {
        if (x == 0) continue;
        mpz_class d = strip(x.get_den(), p);
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), d.get_mpz_t());
        mpz_class nn = strip(x.get_num(), p);
        mpz_gcd(G.get_mpz_t(), G.get_mpz_t(), nn.get_mpz_t());
    }
    if (G == 0) return;
    mpq_class s(L, G);
    s.canonicalize();
    for (auto& x : v) x *= s;
}

bool is_zero(const QVec& v) {
    for (auto& x : v)
        if (x != 0) return false;
    return true;
}

struct LocalBasis {
    std::vector<QVec> rows;
    std::vector<int> piv;
};

LocalBasis local_basis(std::vector<QVec> pool, int D, u64 p) {
    LocalBasis B;
    pool.erase(std::remove_if(pool.begin(), pool.end(), is_zero), pool.end());
    for (auto& g : pool) unit_normalize(g, p);
    for (int c = 0; c < D && !pool.empty(); ++c) {
        int best = -1, bv = INT_MAX;
        for (int i = 0; i < (int)pool.size(); ++i) {
            if (pool[i][c] == 0) continue;
            int v = vp(pool[i][c], p);
            if (v < bv) {
                bv = v;
                best = i;
            }
        }
        if (best < 0) continue;
        QVec piv = pool[best];
        pool.erase(pool.begin() + best);
        for (auto& g : pool) {
            if (g[c] == 0) continue;
            mpq_class f = g[c] / piv[c];
            for (int j = c; j < D; ++j)
                if (piv[j] != 0) g[j] -= f * piv[j];
            unit_normalize(g, p);
        }
        pool.erase(std::remove_if(pool.begin(), pool.end(), is_zero), pool.end());
        B.rows.push_back(piv);
        B.piv.push_back(c);
    }
    return B;
}

// coordinates of w in the basis; nullopt if w is outside the Q-span
std::optional<QVec> coords_in(const LocalBasis& B, QVec w) {
    QVec c(B.rows.size());
    for (size_t i = 0; i < B.rows.size(); ++i) {
        int pc = B.piv[i];
        if (w[pc] == 0) continue;
        c[i] = w[pc] / B.rows[i][pc];
        for (size_t j = pc; j < w.size(); ++j)
            if (B.rows[i][j] != 0) w[j] -= c[i] * B.rows[i][j];
    }
    if (!is_zero(w)) return std::nullopt;
    return c;
}

QVec mat_vec(const std::vector<QVec>& A, const QVec& v) {
    QVec out(A.size());
    for (size_t i = 0; i < A.size(); ++i) {
        mpq_class s = 0;
        for (size_t j = 0; j < v.size(); ++j)
            if (v[j] != 0 && A[i][j] != 0) s += A[i][j] * v[j];
        out[i] = s;
    }
    return out;
}

// K-linear matrix as a Q-matrix on coordinates index i*deg + s
std::vector<QVec> rational_matrix(const ExactMatrix& A) {
    const CycField* K = A.F;
    int deg = K->degree(), m = A.r, D = m * deg;
    std::vector<QVec> R(D, QVec(D));
    std::vector<CycScalar> basis;
    for (int t = 0; t < deg; ++t) {
        CycScalar b(K);
        b[t] = 1;
        basis.push_back(b);
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (A.at(i, j).is_zero()) continue;
            for (int t = 0; t < deg; ++t) {
                CycScalar v = A.at(i, j) * basis[t];
                for (int s = 0; s < deg; ++s) R[i * deg + s][j * deg + t] = v[s];
            }
        }
    return R;
}

ModMat inverse_mod(const Fp& F, const ModMat& A) {
    int n = A.r;
    ModMat X(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) X.at(i, j) = A.at(i, j);
        X.at(i, n + i) = 1;
    }
    auto piv = rref(F, X);
    if ((int)piv.size() < n || piv[n - 1] != n - 1) throw std::domain_error("singular matrix");
    ModMat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = X.at(i, n + j);
    return out;
}

}  // namespace

CongruenceResult congruence_eliminate(const ExactOperators& X, const std::map<std::string, long>& target, u64 p,
                                      const std::vector<std::string>& ordinary_keys) {
    CongruenceResult res;
    const CycField* K = X.K;
    ModpReduction red = choose_reduction(K, p);
    res.reduction = red.str();
    Fp F(p);
    if (X.dim == 0) {
        res.possible = false;
        res.notes.push_back("candidate space is zero");
        return res;
    }

    // characteristic polynomials modulo the prime
    for (auto& [key, a] : target) {
        auto cp = X.charpoly(key);
        u64 v = 0, av = F.from((i64)a);
        try {
            for (size_t i = cp.size(); i-- > 0;) v = F.add(F.mul(v, av), reduce_scalar(cp[i], red));
        } catch (const std::domain_error&) {
            res.notes.push_back("char poly of " + key + " is not p-integral");
            continue;
        }
        if (v != 0) {
            res.prefilter_eliminated = true;
            res.possible = false;
            res.notes.push_back("char poly of " + key + " has no root " + std::to_string(a) + " mod " + red.str());
        }
    }
    if (res.prefilter_eliminated) return res;

    int deg = K->degree(), D = X.dim * deg;
    std::vector<std::string> keys;
    for (auto& [k, a] : target) keys.push_back(k);
    for (auto& k : ordinary_keys)
        if (!target.count(k)) keys.push_back(k);
    std::map<std::string, std::vector<QVec>> R;
    for (auto& k : keys) R[k] = rational_matrix(X.ops.at(k));
    std::vector<std::pair<std::string, std::vector<QVec>>> structure;
    {
        ExactMatrix Z(K, X.dim, X.dim);
        for (int i = 0; i < X.dim; ++i) Z.at(i, i) = CycScalar::zeta_power(K, 1);
        structure.push_back({"zeta", rational_matrix(Z)});
        if (K->d()) {
            ExactMatrix Sd(K, X.dim, X.dim);
            for (int i = 0; i < X.dim; ++i) Sd.at(i, i) = CycScalar::sqrt_d(K);
            structure.push_back({"sqrtd", rational_matrix(Sd)});
        }
    }
    std::vector<const std::vector<QVec>*> all;
    for (auto& k : keys) all.push_back(&R[k]);
    for (auto& s : structure) all.push_back(&s.second);

    // saturate the standard lattice under everything
    std::vector<QVec> gens;
    for (int i = 0; i < D; ++i) {
        QVec e(D);
        e[i] = 1;
        gens.push_back(e);
    }
    LocalBasis B;
    bool stable = false;
    for (int it = 0; it < 64 && !stable; ++it) {
        B = local_basis(gens, D, p);
        stable = true;
        gens = B.rows;
        for (auto* A : all)
            for (auto& b : B.rows) {
                QVec w = mat_vec(*A, b);
                auto c = coords_in(B, w);
                if (!c) throw std::runtime_error("lattice lost rank");
                for (auto& x : *c)
                    if (x != 0 && vp(x, p) < 0) stable = false;
                gens.push_back(w);
            }
    }
    if (!stable) {
        res.notes.push_back("lattice did not stabilise; no conclusion");
        return res;
    }
    res.lattice_rank = (int)B.rows.size();

    auto reduce_op = [&](const std::vector<QVec>& A) {
        int n = (int)B.rows.size();
        ModMat M(n, n);
        for (int i = 0; i < n; ++i) {
            auto c = coords_in(B, mat_vec(A, B.rows[i]));
            for (int j = 0; j < n; ++j) M.at(j, i) = F.from((*c)[j]);
        }
        return M;
    };
    // quotient by (zeta - g, sqrt d - s)
    ModMat A;
    {
        ModMat Zc = scalar_shift(F, reduce_op(structure[0].second), red.zeta_img);
        A = Zc;
        if (structure.size() > 1) A = hstack(A, scalar_shift(F, reduce_op(structure[1].second), red.sqrtd_img));
    }
    ModMat Qm = transpose(kernel(F, transpose(A)));
    int m = Qm.r;
    res.reduced_dim = m;
    if (m == 0) {
        res.possible = false;
        res.notes.push_back("reduction is zero");
        return res;
    }
    ModMat Qc = Qm;
    auto piv = rref(F, Qc);
    ModMat inv = inverse_mod(F, select_cols(Qm, piv));
    ModMat S(Qm.c, m);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j) S.at(piv[k], j) = inv.at(k, j);
    auto bar = [&](const std::string& k) { return mul(F, mul(F, Qm, reduce_op(R[k])), S); };

    ModMat V = ModMat::identity(m);
    for (auto& [k, a] : target) {
        ModMat N = mat_pow(F, scalar_shift(F, bar(k), F.from((i64)a)), m);
        V = intersect(F, V, kernel(F, N));
        res.witness.push_back({"T " + k, V.c});
        if (V.c == 0) break;
    }
    if (V.c > 0 && !ordinary_keys.empty()) {
        for (auto& k : ordinary_keys) {
            ModMat U = mat_pow(F, bar(k), m);
            ModMat Im = canonical_basis(F, U);
            V = intersect(F, V, Im);
            res.witness.push_back({"ord " + k, V.c});
            if (V.c == 0) break;
        }
        res.ordinary_dim = V.c;
    }
    res.possible = V.c > 0;
    return res;
}

}  // namespace bianchi
