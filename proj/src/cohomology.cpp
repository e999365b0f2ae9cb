#include "bianchi/cohomology.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bianchi {

const char* kCodeVersion = "bianchi-1";

u64 Embedding::image(const IQInt& x) const {
    u64 a = F.from(x.a()), b = F.from(x.b());
    if (b == 0) return a;
    if (d == 0) throw std::logic_error("embedding has no square root of d");
    const FieldCtx& f = x.field();
    u64 w = f.half ? F.mul(F.add(1, sqrtd), F.inv(2)) : sqrtd;
    return F.add(a, F.mul(b, w));
}

Embedding make_embedding(u64 q, int n, long d, long j) {
    Embedding E;
    E.F = Fp(q);
    E.n = n;
    E.d = d;
    u64 r = primitive_root_of_unity(E.F, (u64)n);
    long jj = ((j % n) + n) % n;
    E.zeta = E.F.pow(r, (u64)jj);
    E.sqrtd = d ? sqrt_mod(E.F, E.F.from((i64)d)) : 0;
    E.zpow.resize(n);
    u64 z = 1;
    for (int i = 0; i < n; ++i) {
        E.zpow[i] = z;
        z = E.F.mul(z, E.zeta);
    }
    return E;
}

std::vector<u64> embedding_primes(int count, int n, long d) { return choose_primes(count, (u64)n, d); }

int element_order(const Mat2& g, int max_order) {
    Mat2 I = Mat2::identity(g.a.d());
    Mat2 h = g;
    for (int k = 1; k <= max_order; ++k) {
        if (h == I) return k;
        h = h * g;
    }
    return 0;
}

CharValues::CharValues(const DirichletChar& eps, int n) : eps_(&eps), n_(n) {
    if (n % eps.order() != 0) throw std::invalid_argument("root of unity order is not a multiple of the character order");
    const Modulus& M = eps.modulus();
    int scale = n / eps.order();
    for (int i = 0; i < M.nlocal(); ++i) {
        const ResidueRing& L = M.local_ring(i);
        std::vector<int> v(L.size(), -1);
        for (long r = 0; r < L.size(); ++r) {
            int e = eps.value_local(i, r);
            if (e >= 0) v[r] = e * scale;
        }
        val_.push_back(std::move(v));
    }
}

int CharValues::exponent(const long* u) const {
    long acc = 0;
    for (size_t i = 0; i < val_.size(); ++i) {
        int e = val_[i][u[i]];
        if (e < 0) throw std::domain_error("character evaluated at a non-unit");
        acc += e;
    }
    return (int)(acc % n_);
}

int CharValues::exponent_at(const IQInt& x) const {
    const Modulus& M = eps_->modulus();
    std::vector<long> loc;
    for (int i = 0; i < M.nlocal(); ++i) loc.push_back(M.local_ring(i).index(x));
    return exponent(loc.data());
}

// ---------------------------------------------------------------------------

const CellDomainData& CellDomainData::get(long d) {
    if (d != -2) throw std::invalid_argument("no fundamental-domain data for d = " + std::to_string(d));
    static const CellDomainData data = [] {
        CellDomainData c;
        c.d = -2;
        c.two_cells = 2;
        c.edges = 6;
        c.stab = {
            mat2(-2, {{{0, 0}, {-1, 0}, {1, 0}, {0, 0}}}),
            mat2(-2, {{{-1, 0}, {0, 0}, {0, 0}, {-1, 0}}}),
            mat2(-2, {{{0, -1}, {1, 0}, {1, 0}, {0, 1}}}),
            mat2(-2, {{{-1, 0}, {0, -1}, {0, -1}, {1, 0}}}),
            mat2(-2, {{{1, 0}, {1, 0}, {-1, 0}, {0, 0}}}),
            mat2(-2, {{{1, 1}, {-1, 1}, {-1, 0}, {0, -1}}}),
        };
        c.orders = {4, 2, 4, 4, 6, 6};
        c.G = mat2(-2, {{{-1, 0}, {0, 1}, {0, 0}, {-1, 0}}});
        c.verify();
        return c;
    }();
    return data;
}

bool CellDomainData::available(long d) { return d == -2; }

void CellDomainData::verify() const {
    IQInt one(1, 0, d);
    for (int i = 0; i < edges; ++i) {
        if (stab[i].det() != one) throw std::logic_error("edge stabilizer " + std::to_string(i + 1) + " has det != 1");
        if (element_order(stab[i]) != orders[i])
            throw std::logic_error("edge stabilizer " + std::to_string(i + 1) + " has the wrong order");
        // -I must lie in the cyclic group
        Mat2 mI = {IQInt(-1, 0, d), IQInt(0, 0, d), IQInt(0, 0, d), IQInt(-1, 0, d)};
        Mat2 h = stab[i];
        bool has = false;
        for (int k = 1; k <= orders[i]; ++k, h = h * stab[i])
            if (h == mI) has = true;
        if (!has) throw std::logic_error("edge stabilizer does not contain -I");
    }
    if (G.det() != one) throw std::logic_error("twisting matrix has det != 1");
}

// ---------------------------------------------------------------------------

ModMat WeightModule::sym(const Fp& F, u64 a, u64 b, u64 c, u64 d) const {
    int k = k_;
    std::vector<std::vector<u64>> C(k + 1, std::vector<u64>(k + 1, 0));
    for (int i = 0; i <= k; ++i) {
        C[i][0] = 1;
        for (int j = 1; j <= i; ++j) C[i][j] = F.add(C[i - 1][j - 1], j <= i - 1 ? C[i - 1][j] : 0);
    }
    ModMat S(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
        // (aX + cY)^i (bX + dY)^(k-i)
        std::vector<u64> p1(i + 1), p2(k - i + 1);
        for (int s = 0; s <= i; ++s) p1[s] = F.mul(C[i][s], F.mul(F.pow(a, s), F.pow(c, i - s)));
        for (int t = 0; t <= k - i; ++t) p2[t] = F.mul(C[k - i][t], F.mul(F.pow(b, t), F.pow(d, k - i - t)));
        for (int s = 0; s <= i; ++s)
            for (int t = 0; t <= k - i; ++t) S.at(s + t, i) = F.add(S.at(s + t, i), F.mul(p1[s], p2[t]));
    }
    return S;
}

ModMat WeightModule::action(const Embedding& E, const Mat2& g) const {
    const Fp& F = E.F;
    if (k_ == 0) {
        ModMat I(1, 1);
        I.at(0, 0) = 1;
        return I;
    }
    ModMat S1 = sym(F, E.image(g.a), E.image(g.b), E.image(g.c), E.image(g.d));
    ModMat S2 = sym(F, E.image(g.a.conj()), E.image(g.b.conj()), E.image(g.c.conj()), E.image(g.d.conj()));
    int m = k_ + 1;
    ModMat out(m * m, m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int i2 = 0; i2 < m; ++i2)
                for (int j2 = 0; j2 < m; ++j2) out.at(i * m + j, i2 * m + j2) = F.mul(S1.at(i, i2), S2.at(j, j2));
    return out;
}

// ---------------------------------------------------------------------------

InducedModule::InducedModule(const ProjLine& P, const DirichletChar& eps, int k, const Embedding& E, unsigned seed)
    : P_(&P), eps_(&eps), W_(k, P.modulus().ideal().gen.d()), E_(E), n_(P.size()), cv_(eps, E.n), twist_(P.size(), 0) {
    if (seed) {
        std::mt19937 rng(seed);
        for (auto& t : twist_) t = (long)(rng() % (unsigned)E.n);
    }
}

InducedModule::Action InducedModule::act(const Mat2& g) const {
    Action A;
    A.target.resize(n_);
    A.scal.resize(n_);
    auto rg = P_->reduce(g);
    std::vector<long> u(P_->modulus().nlocal());
    for (long x = 0; x < n_; ++x) {
        long y = P_->act(x, rg, u.data());
        if (y < 0) throw std::invalid_argument("matrix does not act on P^1 (not invertible mod N)");
        A.target[x] = y;
        A.scal[x] = E_.zeta_pow(cv_.exponent(u.data()) + twist_[x] - twist_[y]);
    }
    A.fiber = W_.action(E_, g);
    return A;
}

std::vector<SparseRow> InducedModule::fixed_subspace(const Mat2& g) const {
    if (element_order(g) == 0) throw std::invalid_argument("fixed_subspace: element of infinite order");
    const Fp& F = E_.F;
    Action A = act(g);
    int f = W_.dim();
    std::vector<char> seen(n_, 0);
    std::vector<SparseRow> out;
    ModMat Id = ModMat::identity(f);
    for (long x0 = 0; x0 < n_; ++x0) {
        if (seen[x0]) continue;
        std::vector<long> orbit;
        long x = x0;
        do {
            seen[x] = 1;
            orbit.push_back(x);
            x = A.target[x];
        } while (x != x0);
        // B = A_0 A_1 ... A_{l-1}, A_i = scal_i * fiber
        u64 s = 1;
        for (long y : orbit) s = F.mul(s, A.scal[y]);
        ModMat B = Id;
        for (size_t i = 0; i < orbit.size(); ++i) B = mul(F, B, A.fiber);
        for (auto& v : B.a) v = F.mul(v, s);
        ModMat K = kernel(F, sub(F, B, Id));
        for (int c = 0; c < K.c; ++c) {
            // F(x_{l-1}) = A_{l-1} F(x_0), F(x_{i}) = A_i F(x_{i+1})
            std::vector<std::vector<u64>> vals(orbit.size(), std::vector<u64>(f));
            for (int i = 0; i < f; ++i) vals[0][i] = K.at(i, c);
            std::vector<u64> cur = vals[0];
            for (size_t i = orbit.size(); i-- > 1;) {
                std::vector<u64> nxt(f, 0);
                for (int r = 0; r < f; ++r) {
                    u64 acc = 0;
                    for (int t = 0; t < f; ++t) acc = F.add(acc, F.mul(A.fiber.at(r, t), cur[t]));
                    nxt[r] = F.mul(acc, A.scal[orbit[i]]);
                }
                vals[i] = nxt;
                cur = nxt;
            }
            SparseRow row;
            for (size_t i = 0; i < orbit.size(); ++i)
                for (int t = 0; t < f; ++t)
                    if (vals[i][t]) row.push_back({(int)(orbit[i] * f + t), vals[i][t]});
            std::sort(row.begin(), row.end());
            out.push_back(std::move(row));
        }
    }
    return out;
}

ModMat InducedModule::dense(const Mat2& g) const {
    const Fp& F = E_.F;
    Action A = act(g);
    int f = W_.dim();
    ModMat D((int)dim(), (int)dim());
    for (long x = 0; x < n_; ++x)
        for (int r = 0; r < f; ++r)
            for (int c = 0; c < f; ++c) D.at((int)(x * f + r), (int)(A.target[x] * f + c)) = F.mul(A.scal[x], A.fiber.at(r, c));
    return D;
}

ModMat InducedModule::averaging_projector(const Mat2& g) const {
    const Fp& F = E_.F;
    int m = element_order(g);
    if (m == 0) throw std::invalid_argument("averaging_projector: element of infinite order");
    ModMat D = dense(g), P = ModMat::identity((int)dim()), acc((int)dim(), (int)dim());
    for (int i = 0; i < m; ++i) {
        for (size_t t = 0; t < acc.a.size(); ++t) acc.a[t] = F.add(acc.a[t], P.a[t]);
        P = mul(F, P, D);
    }
    u64 inv = F.inv((u64)m);
    for (auto& v : acc.a) v = F.mul(v, inv);
    return acc;
}

// ---------------------------------------------------------------------------

std::vector<SparseRow> d1_columns(const InducedModule& M, const CellDomainData& C) {
    const Fp& F = M.embedding().F;
    long n = M.dim();
    int f = M.fiber();
    // (m_1..m_6) -> (-m1 + m2 - m4 + m5, -rho(G) m2 - m3 + m4 + m6)
    static const int top[6] = {-1, 1, 0, -1, 1, 0};
    static const int bot[6] = {0, 0, -1, 1, 0, 1};
    auto G = M.act(C.G);
    std::vector<long> inv(M.cosets());
    for (long x = 0; x < M.cosets(); ++x) inv[G.target[x]] = x;
    std::vector<SparseRow> cols;
    for (int e = 0; e < 6; ++e) {
        auto basis = M.fixed_subspace(C.stab[e]);
        for (const auto& m : basis) {
            std::map<long, u64> col;
            auto addto = [&](long idx, u64 v) {
                auto& slot = col[idx];
                slot = F.add(slot, v);
            };
            for (auto [i, v] : m) {
                if (top[e]) addto(i, top[e] > 0 ? v : F.neg(v));
                if (bot[e]) addto(n + i, bot[e] > 0 ? v : F.neg(v));
            }
            if (e == 1) {
                // -rho(G) m: block at x is scal_x * fiber * m(y), y = target[x]
                std::map<long, std::vector<u64>> blocks;
                for (auto [i, v] : m) {
                    auto& b = blocks[i / f];
                    if (b.empty()) b.assign(f, 0);
                    b[i % f] = v;
                }
                for (auto& [y, b] : blocks) {
                    long x = inv[y];
                    for (int r = 0; r < f; ++r) {
                        u64 acc = 0;
                        for (int t = 0; t < f; ++t) acc = F.add(acc, F.mul(G.fiber.at(r, t), b[t]));
                        acc = F.mul(acc, G.scal[x]);
                        if (acc) addto(n + x * f + r, F.neg(acc));
                    }
                }
            }
            SparseRow row;
            for (auto [i, v] : col)
                if (v) row.push_back({(int)i, v});
            cols.push_back(std::move(row));
        }
    }
    return cols;
}

D1Result h2_by_d1(const ProjLine& P, const DirichletChar& eps, int k, u64 q, unsigned seed) {
    D1Result res;
    res.q = q;
    long d = P.modulus().ideal().gen.d();
    const CellDomainData& C = CellDomainData::get(d);
    if (eps.sign() == -1) {
        // -I acts by eps(-1) = -1 on every fibre
        res.forced_zero = true;
        return res;
    }
    Embedding E = make_embedding(q, eps.order(), k > 0 ? d : 0);
    InducedModule M(P, eps, k, E, seed);
    auto cols = d1_columns(M, C);
    res.e1_dim = 2 * M.dim();
    res.d1_cols = (long)cols.size();
    SparseEchelon ech(E.F, (int)res.e1_dim);
    for (const auto& c : cols) ech.insert(c);
    res.d1_rank = ech.rank();
    res.h2_dim = res.e1_dim - res.d1_rank;
    return res;
}

// ---------------------------------------------------------------------------

namespace {
const Mat2& mI() {
    static const Mat2 m = mat2(-2, {{{-1, 0}, {0, 0}, {0, 0}, {-1, 0}}});
    return m;
}
const Mat2& Smat() {
    static const Mat2 m = mat2(-2, {{{0, 0}, {-1, 0}, {1, 0}, {0, 0}}});
    return m;
}

struct ScalarUnionFind {
    const Fp& F;
    std::vector<long>& parent;
    std::vector<u64>& scal;
    std::vector<char> bad;
    std::pair<long, u64> find(long x) {
        long r = x;
        u64 s = 1;
        while (parent[r] != r) {
            s = F.mul(s, scal[r]);
            r = parent[r];
        }
        // compress
        long y = x;
        u64 sy = s;
        while (parent[y] != y) {
            long nx = parent[y];
            u64 ns = F.mul(sy, F.inv(scal[y]));
            parent[y] = r;
            scal[y] = sy;
            y = nx;
            sy = ns;
        }
        return {r, s};
    }
    // val(x) = t * val(k)
    void relate(long x, u64 t, long k) {
        auto [rx, sx] = find(x);
        auto [rk, sk] = find(k);
        if (rx != rk) {
            parent[rx] = rk;
            scal[rx] = F.mul(F.mul(t, sk), F.inv(sx));
            if (bad[rx]) bad[rk] = 1;
        } else if (sx != F.mul(t, sk)) {
            bad[rx] = 1;
        }
    }
};
}  // namespace

SymbolSpace::SymbolSpace(const ProjLine& P, const DirichletChar& eps, const Embedding& E)
    : P_(&P), eps_(&eps), E_(E), n_(P.size()), cv_(eps, E.n) {
    if (P.modulus().ideal().gen.d() != -2) throw std::invalid_argument("symbol relations are only available for d = -2");
    build_relations();
    build_cusps();
}

long SymbolSpace::sym(long x, const ProjLine::RedMat& g, u64* c) const {
    long u[8];
    long y = P_->act(x, g, u);
    if (y < 0) return -1;
    *c = E_.zeta_pow(-cv_.exponent(u));
    return y;
}

long SymbolSpace::find(long x, u64* s) const {
    long r = x;
    u64 acc = 1;
    while (parent_[r] != r) {
        acc = E_.F.mul(acc, pscal_[r]);
        r = parent_[r];
    }
    *s = acc;
    return r;
}

std::vector<std::vector<std::pair<Mat2, int>>> SymbolSpace::relation_sets() const {
    Mat2 I = Mat2::identity(-2);
    Mat2 T1 = mat2(-2, {{{1, 0}, {-1, 0}, {1, 0}, {0, 0}}});
    Mat2 T2 = mat2(-2, {{{0, 0}, {1, 0}, {-1, 0}, {1, 0}}});
    Mat2 A = mat2(-2, {{{1, 0}, {0, 0}, {0, -1}, {1, 0}}});
    Mat2 B = mat2(-2, {{{0, -1}, {-1, 0}, {-1, 0}, {0, 1}}});
    Mat2 C = mat2(-2, {{{0, 1}, {-1, 0}, {1, 0}, {0, 0}}});
    return {
        {{I, 1}, {mI(), -1}},
        {{I, 1}, {Smat(), 1}},
        {{I, 1}, {T1, 1}, {T2, 1}},
        {{Smat(), 1}, {A, 1}, {B, 1}, {C, -1}},
    };
}

void SymbolSpace::build_relations() {
    const Fp& F = E_.F;
    if (P_->modulus().nlocal() > 8) throw std::invalid_argument("too many prime factors in the level");
    parent_.resize(n_);
    std::iota(parent_.begin(), parent_.end(), 0L);
    pscal_.assign(n_, 1);
    ScalarUnionFind uf{F, parent_, pscal_, std::vector<char>(n_, 0)};
    auto rels = relation_sets();
    auto rI = P_->reduce(mI()), rS = P_->reduce(Smat());
    for (long x = 0; x < n_; ++x) {
        u64 c;
        long k = sym(x, rI, &c);
        uf.relate(x, c, k);  // [x] = [x(-I)] = c[k]
        k = sym(x, rS, &c);
        uf.relate(x, F.neg(c), k);  // [x] = -[xS]
    }
    for (long x = 0; x < n_; ++x) uf.find(x);
    dead_.assign(n_, 0);
    root_col_.assign(n_, -1);
    col_root_.clear();
    for (long x = 0; x < n_; ++x) {
        if (parent_[x] != x) continue;
        if (uf.bad[x]) {
            dead_[x] = 1;
            continue;
        }
        root_col_[x] = (long)col_root_.size();
        col_root_.push_back(x);
    }
    ech_.emplace(F, (int)col_root_.size());
    for (size_t ri = 2; ri < rels.size(); ++ri) {
        std::vector<std::pair<ProjLine::RedMat, int>> red;
        for (auto& [g, s] : rels[ri]) red.push_back({P_->reduce(g), s});
        for (long x = 0; x < n_; ++x) {
            std::map<int, u64> acc;
            for (auto& [g, s] : red) {
                u64 c;
                long k = sym(x, g, &c);
                u64 sk;
                long r = find(k, &sk);
                if (dead_[r]) continue;
                u64 v = F.mul(c, sk);
                if (s < 0) v = F.neg(v);
                auto& slot = acc[(int)root_col_[r]];
                slot = F.add(slot, v);
            }
            SparseRow row;
            for (auto [col, v] : acc)
                if (v) row.push_back({col, v});
            if (!row.empty()) ech_->insert(row);
        }
    }
    ech_->finish();
    col_basis_.assign(col_root_.size(), -1);
    basis_.clear();
    for (int c : ech_->free_cols()) {
        col_basis_[c] = (int)basis_.size();
        basis_.push_back(col_root_[c]);
    }
}

void SymbolSpace::add_symbol(long x, u64 coef, std::vector<u64>& acc) const {
    const Fp& F = E_.F;
    u64 s;
    long r = find(x, &s);
    if (dead_[r]) return;
    u64 f = F.mul(coef, s);
    long col = root_col_[r];
    if (!ech_->is_pivot((int)col)) {
        int b = col_basis_[col];
        acc[b] = F.add(acc[b], f);
        return;
    }
    for (auto [j, v] : ech_->pivot_row((int)col)) {
        int b = col_basis_[j];
        acc[b] = F.sub(acc[b], F.mul(f, v));
    }
}

std::vector<u64> SymbolSpace::coords(long x) const {
    std::vector<u64> acc(dim(), 0);
    add_symbol(x, 1, acc);
    return acc;
}

ModMat SymbolSpace::op(const std::vector<Mat2>& H, bool drop) const {
    int m = dim();
    ModMat T(m, m);
    std::vector<ProjLine::RedMat> red;
    for (auto& h : H) red.push_back(P_->reduce(h));
    std::vector<u64> acc(m);
    for (int j = 0; j < m; ++j) {
        std::fill(acc.begin(), acc.end(), 0);
        long x = basis_[j];
        for (auto& g : red) {
            u64 c;
            long k = sym(x, g, &c);
            if (k < 0) {
                if (drop) continue;
                throw std::invalid_argument("Hecke matrix not invertible modulo the level; use drop for U");
            }
            add_symbol(k, c, acc);
        }
        for (int i = 0; i < m; ++i) T.at(i, j) = acc[i];
    }
    return T;
}

ModMat SymbolSpace::J() const {
    Mat2 j = mat2(-2, {{{-1, 0}, {0, 0}, {0, 0}, {1, 0}}});
    return op({j});
}

bool SymbolSpace::preserves_relations(const std::vector<Mat2>& H, bool drop) const {
    const Fp& F = E_.F;
    std::vector<ProjLine::RedMat> red;
    for (auto& h : H) red.push_back(P_->reduce(h));
    std::vector<u64> acc(dim());
    for (auto& rel : relation_sets()) {
        std::vector<std::pair<ProjLine::RedMat, int>> rr;
        for (auto& [g, s] : rel) rr.push_back({P_->reduce(g), s});
        for (long x = 0; x < n_; ++x) {
            std::fill(acc.begin(), acc.end(), 0);
            for (auto& [g, s] : rr) {
                u64 c;
                long k = sym(x, g, &c);
                if (s < 0) c = F.neg(c);
                for (auto& h : red) {
                    u64 c2;
                    long k2 = sym(k, h, &c2);
                    if (k2 < 0) {
                        if (drop) continue;
                        return false;
                    }
                    add_symbol(k2, F.mul(c, c2), acc);
                }
            }
            for (u64 v : acc)
                if (v) return false;
        }
    }
    return true;
}

void SymbolSpace::build_cusps() {
    const Fp& F = E_.F;
    std::vector<long> parent(n_);
    std::iota(parent.begin(), parent.end(), 0L);
    std::vector<u64> scal(n_, 1);
    ScalarUnionFind uf{F, parent, scal, std::vector<char>(n_, 0)};
    std::vector<Mat2> stab_inf = {
        mat2(-2, {{{1, 0}, {1, 0}, {0, 0}, {1, 0}}}),
        mat2(-2, {{{1, 0}, {0, 1}, {0, 0}, {1, 0}}}),
        mI(),
    };
    for (auto& h : stab_inf) {
        auto rh = P_->reduce(h);
        for (long x = 0; x < n_; ++x) {
            u64 c;
            long k = sym(x, rh, &c);
            uf.relate(x, c, k);
        }
    }
    std::vector<int> cidx(n_, -1);
    ncusp_ = 0;
    for (long x = 0; x < n_; ++x) {
        auto [r, s] = uf.find(x);
        (void)s;
        if (r == x && !uf.bad[x]) cidx[x] = ncusp_++;
    }
    int m = dim();
    boundary_ = ModMat(ncusp_, m);
    auto rS = P_->reduce(Smat());
    for (int j = 0; j < m; ++j) {
        long x = basis_[j];
        auto [r, s] = uf.find(x);
        if (!uf.bad[r]) boundary_.at(cidx[r], j) = F.add(boundary_.at(cidx[r], j), s);
        u64 c;
        long k = sym(x, rS, &c);
        auto [r2, s2] = uf.find(k);
        if (!uf.bad[r2]) boundary_.at(cidx[r2], j) = F.sub(boundary_.at(cidx[r2], j), F.mul(c, s2));
    }
    cusp_ = kernel(F, boundary_);
}

// ---------------------------------------------------------------------------

CohSpace h2_space(const Modulus& M, const DirichletChar& eps, int k, bool with_symbols) {
    CohSpace S;
    long d = M.ideal().gen.d();
    S.d = d;
    S.level = M.ideal().str();
    S.character = eps.str();
    S.k = k;
    S.char_order = eps.order();
    std::string key = std::to_string(d) + "|" + S.level + "|" + S.character + "|" + std::to_string(k) + "|" + (with_symbols ? "s" : "-");
    if (auto j = cache_get("h2", key)) {
        S.cosets = (*j)["cosets"];
        S.d1.e1_dim = (*j)["e1_dim"];
        S.d1.d1_cols = (*j)["d1_cols"];
        S.d1.d1_rank = (*j)["d1_rank"];
        S.d1.h2_dim = (*j)["h2_dim"];
        S.d1.forced_zero = (*j)["forced_zero"];
        S.d1.q = (*j)["q"];
        S.symbol_dim = (*j)["symbol_dim"];
        return S;
    }
    ProjLine P(M);
    S.cosets = P.size();
    u64 q = embedding_primes(1, eps.order(), k > 0 ? d : 0)[0];
    S.d1 = h2_by_d1(P, eps, k, q);
    if (k == 0 && with_symbols) {
        if (S.d1.forced_zero) {
            S.symbol_dim = 0;
        } else {
            Embedding E = make_embedding(q, eps.order(), 0);
            SymbolSpace sp(P, eps, E);
            S.symbol_dim = sp.dim();
        }
    }
    cache_put("h2", key,
              {{"cosets", S.cosets}, {"e1_dim", S.d1.e1_dim}, {"d1_cols", S.d1.d1_cols}, {"d1_rank", S.d1.d1_rank},
               {"h2_dim", S.d1.h2_dim}, {"forced_zero", S.d1.forced_zero}, {"q", S.d1.q}, {"symbol_dim", S.symbol_dim}});
    return S;
}

// ---------------------------------------------------------------------------

namespace {
std::mutex cache_mu;
std::optional<std::filesystem::path> cache_file(const std::string& kind, const std::string& key) {
    const char* dir = std::getenv("BIANCHI_CACHE");
    if (!dir || !*dir) return std::nullopt;
    std::string full = std::string(kCodeVersion) + "|" + key;
    std::ostringstream h;
    h << std::hex << std::hash<std::string>{}(full);
    return std::filesystem::path(dir) / kind / (h.str() + ".json");
}
}  // namespace

std::optional<nlohmann::json> cache_get(const std::string& kind, const std::string& key) {
    auto f = cache_file(kind, key);
    if (!f) return std::nullopt;
    std::lock_guard<std::mutex> lock(cache_mu);
    std::ifstream in(*f);
    if (!in) return std::nullopt;
    try {
        nlohmann::json j = nlohmann::json::parse(in);
        if (j.value("key", "") != std::string(kCodeVersion) + "|" + key) return std::nullopt;
        return j["value"];
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void cache_put(const std::string& kind, const std::string& key, const nlohmann::json& value) {
    auto f = cache_file(kind, key);
    if (!f) return;
    std::lock_guard<std::mutex> lock(cache_mu);
    std::filesystem::create_directories(f->parent_path());
    std::filesystem::path tmp = *f;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        out << nlohmann::json{{"key", std::string(kCodeVersion) + "|" + key}, {"value", value}}.dump();
    }
    std::filesystem::rename(tmp, *f);
}

}  // namespace bianchi
