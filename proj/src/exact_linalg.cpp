#include "bianchi/exact_linalg.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <memory>
#include <mutex>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bianchi {

u64 Fp::pow(u64 a, u64 e) const {
    u64 r = 1 % q;
    a %= q;
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

u64 Fp::inv(u64 a) const {
    if (a % q == 0) throw std::domain_error("inverse of zero mod q");
    return pow(a, q - 2);
}

u64 Fp::from(i64 a) const {
    i64 r = a % (i64)q;
    return r < 0 ? (u64)(r + (i64)q) : (u64)r;
}

u64 Fp::from(const mpz_class& a) const { return mpz_fdiv_ui(a.get_mpz_t(), q); }

u64 Fp::from(const mpq_class& a) const {
    u64 den = from(mpz_class(a.get_den()));
    if (den == 0) throw std::domain_error("denominator vanishes mod q");
    return mul(from(mpz_class(a.get_num())), inv(den));
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) d >>= 1, ++s;
    Fp F(n);
    for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        u64 x = F.pow(a, d);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int i = 1; i < s; ++i) {
            x = F.mul(x, x);
            if (x == n - 1) { comp = false; break; }
        }
        if (comp) return false;
    }
    return true;
}

namespace {
bool is_square_mod(u64 a, u64 q) {
    Fp F(q);
    a %= q;
    if (a == 0) return true;
    return F.pow(a, (q - 1) / 2) == 1;
}
}  // namespace

std::vector<u64> choose_primes(int count, u64 n, long d, u64 start) {
    if (n == 0) n = 1;
    std::vector<u64> out;
    u64 q = start - ((start - 1) % n);
    while ((int)out.size() < count) {
        if (is_prime_u64(q)) {
            bool ok = true;
            if (d != 0) {
                Fp F(q);
                ok = is_square_mod(F.from((i64)d), q);
            }
            if (ok) out.push_back(q);
        }
        q -= n;
    }
    return out;
}

u64 primitive_root_of_unity(const Fp& F, u64 n) {
    if ((F.q - 1) % n != 0) throw std::invalid_argument("q is not 1 mod n");
    if (n == 1) return 1;
    std::vector<u64> pf;
    u64 m = n;
    for (u64 p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            pf.push_back(p);
            while (m % p == 0) m /= p;
        }
    if (m > 1) pf.push_back(m);
    for (u64 g = 2;; ++g) {
        u64 r = F.pow(g, (F.q - 1) / n);
        bool ok = true;
        for (u64 p : pf)
            if (F.pow(r, n / p) == 1) ok = false;
        if (ok) return r;
    }
}

u64 sqrt_mod(const Fp& F, u64 a) {
    u64 q = F.q;
    a %= q;
    if (a == 0) return 0;
    if (q == 2) return a;
    if (!is_square_mod(a, q)) throw std::domain_error("not a square mod q");
    u64 Q = q - 1;
    int S = 0;
    while ((Q & 1) == 0) Q >>= 1, ++S;
    u64 z = 2;
    while (is_square_mod(z, q)) ++z;
    u64 M = S, c = F.pow(z, Q), t = F.pow(a, Q), R = F.pow(a, (Q + 1) / 2);
    while (t != 1) {
        u64 i = 0, tt = t;
        while (tt != 1) tt = F.mul(tt, tt), ++i;
        u64 b = c;
        for (u64 j = 0; j + 1 < M - i; ++j) b = F.mul(b, b);
        M = i;
        c = F.mul(b, b);
        t = F.mul(t, c);
        R = F.mul(R, b);
    }
    return std::min(R, q - R);
}

mpz_class crt(const mpz_class& a, const mpz_class& m, u64 b, u64 q) {
    Fp F(q);
    u64 am = F.from(a);
    u64 mm = F.from(m);
    u64 t = F.mul(F.sub(b % q, am), F.inv(mm));
    mpz_class r = a + m * mpz_class((unsigned long)t);
    mpz_class M = m * mpz_class((unsigned long)q);
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), M.get_mpz_t());
    return r;
}

std::optional<mpq_class> rational_reconstruct(const mpz_class& a0, const mpz_class& m) {
    mpz_class a;
    mpz_mod(a.get_mpz_t(), a0.get_mpz_t(), m.get_mpz_t());
    mpz_class bound;
    mpz_class half = m / 2;
    mpz_sqrt(bound.get_mpz_t(), half.get_mpz_t());
    mpz_class r0 = m, r1 = a, s0 = 0, s1 = 1;
    while (r1 > bound) {
        mpz_class qq = r0 / r1;
        mpz_class r2 = r0 - qq * r1;
        r0 = r1;
        r1 = r2;
        mpz_class s2 = s0 - qq * s1;
        s0 = s1;
        s1 = s2;
    }
    if (s1 == 0 || abs(s1) > bound) return std::nullopt;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r1.get_mpz_t(), s1.get_mpz_t());
    if (g != 1) return std::nullopt;
    mpq_class out(r1, s1);
    out.canonicalize();
    return out;
}

// ---------------------------------------------------------------------------

ModMat ModMat::identity(int n) {
    ModMat I(n, n);
    for (int i = 0; i < n; ++i) I.at(i, i) = 1;
    return I;
}

bool ModMat::is_zero() const {
    for (u64 x : a)
        if (x) return false;
    return true;
}

ModMat mul(const Fp& F, const ModMat& A, const ModMat& B) {
    if (A.c != B.r) throw std::invalid_argument("mul: dimension mismatch");
    ModMat C(A.r, B.c);
    std::vector<u128> acc(B.c);
    for (int i = 0; i < A.r; ++i) {
        std::fill(acc.begin(), acc.end(), 0);
        for (int k = 0; k < A.c; ++k) {
            u64 x = A.at(i, k);
            if (!x) continue;
            const u64* br = &B.a[(size_t)k * B.c];
            for (int j = 0; j < B.c; ++j) {
                acc[j] += (u128)x * br[j];
                if (acc[j] >> 125) acc[j] %= F.q;
            }
        }
        for (int j = 0; j < B.c; ++j) C.at(i, j) = (u64)(acc[j] % F.q);
    }
    return C;
}

ModMat sub(const Fp& F, const ModMat& A, const ModMat& B) {
    if (A.r != B.r || A.c != B.c) throw std::invalid_argument("sub: dimension mismatch");
    ModMat C(A.r, A.c);
    for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = F.sub(A.a[i], B.a[i]);
    return C;
}

ModMat transpose(const ModMat& A) {
    ModMat T(A.c, A.r);
    for (int i = 0; i < A.r; ++i)
        for (int j = 0; j < A.c; ++j) T.at(j, i) = A.at(i, j);
    return T;
}

ModMat hstack(const ModMat& A, const ModMat& B) {
    if (A.r != B.r) throw std::invalid_argument("hstack: row mismatch");
    ModMat C(A.r, A.c + B.c);
    for (int i = 0; i < A.r; ++i) {
        for (int j = 0; j < A.c; ++j) C.at(i, j) = A.at(i, j);
        for (int j = 0; j < B.c; ++j) C.at(i, A.c + j) = B.at(i, j);
    }
    return C;
}

ModMat select_cols(const ModMat& A, const std::vector<int>& cols) {
    ModMat C(A.r, (int)cols.size());
    for (int i = 0; i < A.r; ++i)
        for (size_t j = 0; j < cols.size(); ++j) C.at(i, (int)j) = A.at(i, cols[j]);
    return C;
}

std::vector<int> rref(const Fp& F, ModMat& A) {
    std::vector<int> piv;
    int r = 0;
    for (int c = 0; c < A.c && r < A.r; ++c) {
        int p = -1;
        for (int i = r; i < A.r; ++i)
            if (A.at(i, c)) { p = i; break; }
        if (p < 0) continue;
        if (p != r)
            for (int j = 0; j < A.c; ++j) std::swap(A.at(p, j), A.at(r, j));
        u64 iv = F.inv(A.at(r, c));
        for (int j = c; j < A.c; ++j) A.at(r, j) = F.mul(A.at(r, j), iv);
        for (int i = 0; i < A.r; ++i) {
            if (i == r) continue;
            u64 f = A.at(i, c);
            if (!f) continue;
            u64 nf = F.neg(f);
            for (int j = c; j < A.c; ++j) {
                u64 x = A.at(r, j);
                if (x) A.at(i, j) = F.add(A.at(i, j), F.mul(nf, x));
            }
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

int rank(const Fp& F, ModMat A) { return (int)rref(F, A).size(); }

ModMat kernel(const Fp& F, const ModMat& A0) {
    ModMat A = A0;
    auto piv = rref(F, A);
    std::vector<char> isp(A.c, 0);
    for (int p : piv) isp[p] = 1;
    std::vector<int> freec;
    for (int c = 0; c < A.c; ++c)
        if (!isp[c]) freec.push_back(c);
    ModMat K(A.c, (int)freec.size());
    for (size_t k = 0; k < freec.size(); ++k) {
        int f = freec[k];
        K.at(f, (int)k) = 1;
        for (size_t i = 0; i < piv.size(); ++i) K.at(piv[i], (int)k) = F.neg(A.at((int)i, f));
    }
    return K;
}

ModMat restrict_to(const Fp& F, const ModMat& T, const ModMat& W) {
    int m = W.c;
    if (m == 0) return ModMat(0, 0);
    ModMat TW = mul(F, T, W);
    ModMat Wt = transpose(W);
    ModMat R = Wt;
    auto pr = rref(F, R);  // pivot columns of W^T = independent rows of W
    if ((int)pr.size() != m) throw std::invalid_argument("restrict_to: basis not independent");
    ModMat Wp(m, m), Tp(m, TW.c);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) Wp.at(i, j) = W.at(pr[i], j);
        for (int j = 0; j < TW.c; ++j) Tp.at(i, j) = TW.at(pr[i], j);
    }
    ModMat aug = hstack(Wp, Tp);
    rref(F, aug);
    ModMat X(m, TW.c);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < TW.c; ++j) X.at(i, j) = aug.at(i, m + j);
    if (!(mul(F, W, X) == TW)) throw std::runtime_error("restrict_to: subspace is not stable");
    return X;
}

ModMat canonical_basis(const Fp& F, const ModMat& W) {
    ModMat R = transpose(W);
    auto piv = rref(F, R);
    ModMat out(W.r, (int)piv.size());
    for (size_t k = 0; k < piv.size(); ++k)
        for (int i = 0; i < W.r; ++i) out.at(i, (int)k) = R.at((int)k, i);
    return out;
}

ModMat intersect(const Fp& F, const ModMat& A, const ModMat& B) {
    ModMat M(A.r, A.c + B.c);
    for (int i = 0; i < A.r; ++i) {
        for (int j = 0; j < A.c; ++j) M.at(i, j) = A.at(i, j);
        for (int j = 0; j < B.c; ++j) M.at(i, A.c + j) = F.neg(B.at(i, j));
    }
    ModMat K = kernel(F, M);
    ModMat top(A.c, K.c);
    for (int i = 0; i < A.c; ++i)
        for (int j = 0; j < K.c; ++j) top.at(i, j) = K.at(i, j);
    ModMat out = mul(F, A, top);
    return canonical_basis(F, out);
}

std::vector<u64> charpoly(const Fp& F, const ModMat& A0) {
    if (A0.r != A0.c) throw std::invalid_argument("charpoly: non-square matrix");
    int n = A0.r;
    ModMat H = A0;
    // Hessenberg form by similarity
    for (int m = 1; m < n - 1; ++m) {
        int p = -1;
        for (int i = m; i < n; ++i)
            if (H.at(i, m - 1)) { p = i; break; }
        if (p < 0) continue;
        if (p != m) {
            for (int j = 0; j < n; ++j) std::swap(H.at(p, j), H.at(m, j));
            for (int i = 0; i < n; ++i) std::swap(H.at(i, p), H.at(i, m));
        }
        u64 iv = F.inv(H.at(m, m - 1));
        for (int i = m + 1; i < n; ++i) {
            u64 u = F.mul(H.at(i, m - 1), iv);
            if (!u) continue;
            for (int j = 0; j < n; ++j) H.at(i, j) = F.sub(H.at(i, j), F.mul(u, H.at(m, j)));
            for (int k = 0; k < n; ++k) H.at(k, m) = F.add(H.at(k, m), F.mul(u, H.at(k, i)));
        }
    }
    // p_k = charpoly of leading k x k block
    std::vector<std::vector<u64>> P(n + 1);
    P[0] = {1};
    for (int k = 1; k <= n; ++k) {
        std::vector<u64> pk(k + 1, 0);
        // (x - h_kk) p_{k-1}
        const auto& pm = P[k - 1];
        u64 h = H.at(k - 1, k - 1);
        for (int i = 0; i < k; ++i) {
            pk[i + 1] = F.add(pk[i + 1], pm[i]);
            pk[i] = F.sub(pk[i], F.mul(h, pm[i]));
        }
        u64 t = 1;
        for (int i = 1; i < k; ++i) {
            t = F.mul(t, H.at(k - i, k - i - 1));
            u64 coef = F.mul(t, H.at(k - i - 1, k - 1));
            if (!coef) continue;
            const auto& pp = P[k - i - 1];
            for (size_t j = 0; j < pp.size(); ++j) pk[j] = F.sub(pk[j], F.mul(coef, pp[j]));
        }
        P[k] = std::move(pk);
    }
    return P[n];
}

// ---------------------------------------------------------------------------

void poly_trim(ModPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

ModPoly poly_mod(const Fp& F, ModPoly a, const ModPoly& m) {
    poly_trim(a);
    ModPoly mm = m;
    poly_trim(mm);
    if (mm.empty()) throw std::domain_error("poly_mod by zero");
    u64 li = F.inv(mm.back());
    int dm = (int)mm.size() - 1;
    while ((int)a.size() - 1 >= dm && !a.empty()) {
        u64 f = F.mul(a.back(), li);
        int sh = (int)a.size() - 1 - dm;
        for (int i = 0; i <= dm; ++i) a[sh + i] = F.sub(a[sh + i], F.mul(f, mm[i]));
        poly_trim(a);
    }
    return a;
}

ModPoly poly_mulmod(const Fp& F, const ModPoly& a, const ModPoly& b, const ModPoly& m) {
    if (a.empty() || b.empty()) return {};
    ModPoly c(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (size_t j = 0; j < b.size(); ++j) c[i + j] = F.add(c[i + j], F.mul(a[i], b[j]));
    return poly_mod(F, c, m);
}

ModPoly poly_gcd(const Fp& F, ModPoly a, ModPoly b) {
    poly_trim(a);
    poly_trim(b);
    while (!b.empty()) {
        ModPoly r = poly_mod(F, a, b);
        a = b;
        b = r;
    }
    if (!a.empty()) {
        u64 iv = F.inv(a.back());
        for (auto& x : a) x = F.mul(x, iv);
    }
    return a;
}

ModPoly poly_powmod_x(const Fp& F, const mpz_class& e, const ModPoly& m) {
    ModPoly r = poly_mod(F, {1}, m), base = poly_mod(F, {0, 1}, m);
    size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = bits; i-- > 0;) {
        r = poly_mulmod(F, r, r, m);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = poly_mulmod(F, r, base, m);
    }
    return r;
}

namespace {
ModPoly poly_sub(const Fp& F, ModPoly a, const ModPoly& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (size_t i = 0; i < b.size(); ++i) a[i] = F.sub(a[i], b[i]);
    poly_trim(a);
    return a;
}
ModPoly poly_div(const Fp& F, ModPoly a, const ModPoly& b) {
    poly_trim(a);
    int db = (int)b.size() - 1;
    if ((int)a.size() - 1 < db) return {};
    ModPoly q(a.size() - b.size() + 1, 0);
    u64 li = F.inv(b.back());
    for (int k = (int)q.size() - 1; k >= 0; --k) {
        u64 f = F.mul(a[k + db], li);
        q[k] = f;
        for (int i = 0; i <= db; ++i) a[k + i] = F.sub(a[k + i], F.mul(f, b[i]));
    }
    return q;
}
void split_roots(const Fp& F, const ModPoly& f, std::vector<u64>& out, std::mt19937_64& rng) {
    int deg = (int)f.size() - 1;
    if (deg <= 0) return;
    if (deg == 1) {
        out.push_back(F.mul(F.neg(f[0]), F.inv(f[1])));
        return;
    }
    if (F.q == 2) {
        for (u64 x = 0; x < 2; ++x) {
            u64 v = 0, p = 1;
            for (u64 c : f) v = F.add(v, F.mul(c, p)), p = F.mul(p, x);
            if (v == 0) out.push_back(x);
        }
        return;
    }
    if (F.q <= 64) {
        for (u64 x = 0; x < F.q; ++x) {
            u64 v = 0;
            for (size_t i = f.size(); i-- > 0;) v = F.add(F.mul(v, x), f[i]);
            if (v == 0) out.push_back(x);
        }
        return;
    }
    for (;;) {
        u64 a = rng() % F.q;
        // gcd(f, (x+a)^((q-1)/2) - 1)
        ModPoly base = poly_mod(F, {a, 1}, f);
        ModPoly r = {1};
        mpz_class e = mpz_class((unsigned long)((F.q - 1) / 2));
        size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
        for (size_t i = bits; i-- > 0;) {
            r = poly_mulmod(F, r, r, f);
            if (mpz_tstbit(e.get_mpz_t(), i)) r = poly_mulmod(F, r, base, f);
        }
        ModPoly g = poly_gcd(F, f, poly_sub(F, r, {1}));
        int dg = (int)g.size() - 1;
        if (dg > 0 && dg < deg) {
            split_roots(F, g, out, rng);
            split_roots(F, poly_div(F, f, g), out, rng);
            return;
        }
    }
}
}  // namespace

std::vector<u64> poly_roots(const Fp& F, const ModPoly& f0) {
    ModPoly f = f0;
    poly_trim(f);
    if (f.empty()) throw std::domain_error("roots of the zero polynomial");
    if (f.size() == 1) return {};
    // product of distinct linear factors: gcd(f, x^q - x)
    ModPoly xq = poly_powmod_x(F, mpz_class((unsigned long)F.q), f);
    ModPoly g = poly_gcd(F, f, poly_sub(F, xq, {0, 1}));
    std::vector<u64> out;
    std::mt19937_64 rng(12345);
    split_roots(F, g, out, rng);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<int, int>> distinct_degree(const Fp& F, ModPoly f) {
    poly_trim(f);
    std::vector<std::pair<int, int>> out;
    if (f.size() <= 1) return out;
    u64 iv = F.inv(f.back());
    for (auto& x : f) x = F.mul(x, iv);
    // squarefree part is enough for the degree pattern of distinct factors
    ModPoly h = {0, 1};
    for (int i = 1; (int)f.size() - 1 >= 2 * i; ++i) {
        ModPoly hq = {1};
        // h <- h^q mod f
        ModPoly base = h;
        u64 e = F.q;
        while (e) {
            if (e & 1) hq = poly_mulmod(F, hq, base, f);
            base = poly_mulmod(F, base, base, f);
            e >>= 1;
        }
        h = hq;
        ModPoly g = poly_gcd(F, f, poly_sub(F, h, {0, 1}));
        if (g.size() > 1) {
            out.push_back({i, (int)g.size() - 1});
            while (true) {
                ModPoly g2 = poly_gcd(F, f, g);
                if (g2.size() <= 1) break;
                f = poly_div(F, f, g2);
            }
            h = poly_mod(F, h, f);
        }
    }
    if (f.size() > 1) out.push_back({(int)f.size() - 1, (int)f.size() - 1});
    return out;
}

// ---------------------------------------------------------------------------

SparseEchelon::SparseEchelon(const Fp& F, int ncols) : F_(F), n_(ncols), piv_(ncols, -1) {}

void SparseEchelon::reduce(std::vector<u64>& acc, std::vector<int>& out, std::vector<char>& mark, bool) const {
    std::priority_queue<int, std::vector<int>, std::greater<int>> heap;
    for (int c : out) heap.push(c);
    out.clear();
    while (!heap.empty()) {
        int c = heap.top();
        heap.pop();
        mark[c] = 0;
        u64 f = acc[c];
        if (!f) continue;
        int pr = piv_[c];
        if (pr >= 0) {
            acc[c] = 0;
            u64 nf = F_.neg(f);
            for (auto [cc, v] : rows_[pr]) {
                acc[cc] = F_.add(acc[cc], F_.mul(nf, v));
                if (!mark[cc]) {
                    mark[cc] = 1;
                    heap.push(cc);
                }
            }
        } else {
            out.push_back(c);
        }
    }
}

bool SparseEchelon::insert(const SparseRow& row) {
    if (finished_) throw std::logic_error("SparseEchelon: insert after finish");
    thread_local std::vector<u64> acc;
    thread_local std::vector<char> mark;
    if ((int)acc.size() < n_) acc.assign(n_, 0), mark.assign(n_, 0);
    std::vector<int> cols;
    for (auto [c, v] : row) {
        if (v % F_.q == 0) continue;
        if (!mark[c]) {
            mark[c] = 1;
            cols.push_back(c);
        }
        acc[c] = F_.add(acc[c], v % F_.q);
    }
    reduce(acc, cols, mark, true);
    SparseRow res;
    for (int c : cols) {
        if (acc[c]) res.push_back({c, acc[c]});
        acc[c] = 0;
    }
    if (res.empty()) return false;
    int p = res[0].first;
    u64 iv = F_.inv(res[0].second);
    SparseRow stored;
    stored.reserve(res.size() - 1);
    for (size_t i = 1; i < res.size(); ++i) stored.push_back({res[i].first, F_.mul(res[i].second, iv)});
    piv_[p] = (int)rows_.size();
    rows_.push_back(std::move(stored));
    ++nrank_;
    return true;
}

void SparseEchelon::finish() {
    if (finished_) return;
    std::vector<int> pivcols;
    for (int c = 0; c < n_; ++c)
        if (piv_[c] >= 0) pivcols.push_back(c);
        else free_.push_back(c);
    std::vector<u64> acc(n_, 0);
    for (auto it = pivcols.rbegin(); it != pivcols.rend(); ++it) {
        SparseRow& row = rows_[piv_[*it]];
        bool needs = false;
        for (auto& e : row)
            if (piv_[e.first] >= 0) { needs = true; break; }
        if (!needs) continue;
        std::vector<int> touched;
        for (auto [c, v] : row) {
            if (piv_[c] >= 0) {
                u64 nf = F_.neg(v);
                for (auto [cc, w] : rows_[piv_[c]]) {
                    if (!acc[cc]) touched.push_back(cc);
                    acc[cc] = F_.add(acc[cc], F_.mul(nf, w));
                    if (!acc[cc]) touched.push_back(cc);
                }
            } else {
                if (!acc[c]) touched.push_back(c);
                acc[c] = F_.add(acc[c], v);
                if (!acc[c]) touched.push_back(c);
            }
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        SparseRow nr;
        for (int c : touched) {
            if (acc[c]) nr.push_back({c, acc[c]});
            acc[c] = 0;
        }
        row = std::move(nr);
    }
    finished_ = true;
}

int sparse_rank(const Fp& F, int ncols, const std::vector<SparseRow>& rows) {
    SparseEchelon E(F, ncols);
    for (const auto& r : rows) E.insert(r);
    return E.rank();
}

// ---------------------------------------------------------------------------

int euler_phi(long n) {
    long r = n, m = n;
    for (long p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            while (m % p == 0) m /= p;
            r -= r / p;
        }
    if (m > 1) r -= r / m;
    return (int)r;
}

std::vector<long> cyclotomic_poly(int n) {
    // x^n - 1 divided by Phi_d for proper divisors d
    std::vector<long> num(n + 1, 0);
    num[0] = -1;
    num[n] = 1;
    for (int d = 1; d < n; ++d) {
        if (n % d) continue;
        std::vector<long> den = cyclotomic_poly(d);
        // exact division by a monic polynomial
        int dn = (int)num.size() - 1, dd = (int)den.size() - 1;
        std::vector<long> q(dn - dd + 1, 0);
        for (int k = dn - dd; k >= 0; --k) {
            long f = num[k + dd];
            q[k] = f;
            for (int i = 0; i <= dd; ++i) num[k + i] -= f * den[i];
        }
        num = q;
    }
    return num;
}

CycField::CycField(int n, long d) : n_(n), d_(d) {
    if (n < 1) throw std::invalid_argument("CycField: n must be positive");
    phin_ = cyclotomic_poly(n);
    phi_ = (int)phin_.size() - 1;
    deg_ = phi_ * (d ? 2 : 1);
}

const CycField* CycField::get(int n, long d) {
    static std::mutex mu;
    static std::map<std::pair<int, long>, std::unique_ptr<CycField>> reg;
    std::lock_guard<std::mutex> lock(mu);
    auto& p = reg[{n, d}];
    if (!p) p = std::make_unique<CycField>(n, d);
    return p.get();
}

CycScalar::CycScalar(const CycField* F) : F_(F), c_(F->degree()) {}
CycScalar::CycScalar(const CycField* F, const mpq_class& r) : F_(F), c_(F->degree()) { c_[0] = r; }

namespace {
// reduce a polynomial in zeta (arbitrary length) modulo Phi_n
std::vector<mpq_class> reduce_cyc(const CycField* F, std::vector<mpq_class> v) {
    int phi = F->phi();
    const auto& P = F->cyclotomic();
    for (int k = (int)v.size() - 1; k >= phi; --k) {
        if (v[k] == 0) continue;
        mpq_class f = v[k];
        for (int i = 0; i <= phi; ++i) v[k - phi + i] -= f * P[i];
    }
    v.resize(phi);
    return v;
}
std::vector<mpq_class> mul_cyc(const CycField* F, const mpq_class* a, const mpq_class* b) {
    int phi = F->phi();
    std::vector<mpq_class> t(2 * phi - 1);
    for (int i = 0; i < phi; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < phi; ++j)
            if (b[j] != 0) t[i + j] += a[i] * b[j];
    }
    return reduce_cyc(F, std::move(t));
}
}  // namespace

CycScalar CycScalar::zeta_power(const CycField* F, long k) {
    long n = F->n();
    k %= n;
    if (k < 0) k += n;
    std::vector<mpq_class> v(std::max<long>(k + 1, F->phi()));
    v[k] = 1;
    CycScalar out(F);
    auto r = reduce_cyc(F, v);
    for (int i = 0; i < F->phi(); ++i) out.c_[i] = r[i];
    return out;
}

CycScalar CycScalar::sqrt_d(const CycField* F) {
    if (!F->d()) throw std::invalid_argument("field has no square root factor");
    CycScalar out(F);
    out.c_[F->phi()] = 1;
    return out;
}

CycScalar CycScalar::operator+(const CycScalar& o) const {
    CycScalar r = *this;
    for (size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
    return r;
}

CycScalar CycScalar::operator-(const CycScalar& o) const {
    CycScalar r = *this;
    for (size_t i = 0; i < c_.size(); ++i) r.c_[i] -= o.c_[i];
    return r;
}

CycScalar CycScalar::operator-() const {
    CycScalar r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

CycScalar CycScalar::operator*(const mpq_class& s) const {
    CycScalar r = *this;
    for (auto& x : r.c_) x *= s;
    return r;
}

CycScalar CycScalar::operator*(const CycScalar& o) const {
    if (F_ != o.F_) throw std::invalid_argument("CycScalar: field mismatch");
    int phi = F_->phi();
    CycScalar r(F_);
    auto p00 = mul_cyc(F_, &c_[0], &o.c_[0]);
    for (int i = 0; i < phi; ++i) r.c_[i] = p00[i];
    if (F_->d()) {
        auto p11 = mul_cyc(F_, &c_[phi], &o.c_[phi]);
        auto p01 = mul_cyc(F_, &c_[0], &o.c_[phi]);
        auto p10 = mul_cyc(F_, &c_[phi], &o.c_[0]);
        for (int i = 0; i < phi; ++i) {
            r.c_[i] += p11[i] * F_->d();
            r.c_[phi + i] = p01[i] + p10[i];
        }
    }
    return r;
}

bool CycScalar::is_zero() const {
    for (auto& x : c_)
        if (x != 0) return false;
    return true;
}

bool CycScalar::is_rational() const {
    for (size_t i = 1; i < c_.size(); ++i)
        if (c_[i] != 0) return false;
    return true;
}

CycScalar CycScalar::inverse() const {
    int D = F_->degree();
    // columns: this * basis_j
    std::vector<std::vector<mpq_class>> A(D, std::vector<mpq_class>(D + 1));
    for (int j = 0; j < D; ++j) {
        CycScalar e(F_);
        e.c_[j] = 1;
        CycScalar p = *this * e;
        for (int i = 0; i < D; ++i) A[i][j] = p.c_[i];
    }
    A[0][D] = 1;
    for (int col = 0, row = 0; col < D; ++col, ++row) {
        int p = -1;
        for (int i = row; i < D; ++i)
            if (A[i][col] != 0) { p = i; break; }
        if (p < 0) throw std::domain_error("CycScalar: not invertible");
        std::swap(A[p], A[row]);
        mpq_class iv = 1 / A[row][col];
        for (int j = col; j <= D; ++j) A[row][j] *= iv;
        for (int i = 0; i < D; ++i) {
            if (i == row || A[i][col] == 0) continue;
            mpq_class f = A[i][col];
            for (int j = col; j <= D; ++j) A[i][j] -= f * A[row][j];
        }
    }
    CycScalar out(F_);
    for (int i = 0; i < D; ++i) out.c_[i] = A[i][D];
    return out;
}

CycScalar CycScalar::conj() const {
    CycScalar r = *this;
    if (F_->d())
        for (int i = F_->phi(); i < F_->degree(); ++i) r.c_[i] = -r.c_[i];
    return r;
}

CycScalar CycScalar::galois(long k) const {
    int phi = F_->phi();
    CycScalar out(F_);
    for (int part = 0; part < (F_->d() ? 2 : 1); ++part)
        for (int i = 0; i < phi; ++i) {
            const mpq_class& x = c_[part * phi + i];
            if (x == 0) continue;
            CycScalar z = zeta_power(F_, (long)i * k);
            for (int j = 0; j < phi; ++j) out.c_[part * phi + j] += x * z.c_[j];
        }
    return out;
}

u64 CycScalar::reduce(const Fp& F, u64 r, u64 s) const {
    int phi = F_->phi();
    u64 acc = 0;
    for (int part = 0; part < (F_->d() ? 2 : 1); ++part) {
        u64 v = 0, rp = 1;
        for (int i = 0; i < phi; ++i) {
            const mpq_class& x = c_[part * phi + i];
            if (x != 0) v = F.add(v, F.mul(F.from(x), rp));
            rp = F.mul(rp, r);
        }
        if (part == 1) v = F.mul(v, s);
        acc = F.add(acc, v);
    }
    return acc;
}

std::string CycScalar::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i].get_str();
    os << '@' << F_->n() << ',' << F_->d();
    return os.str();
}

std::string CycScalar::pretty() const {
    std::ostringstream os;
    bool first = true;
    int phi = F_->phi();
    for (size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        int zi = (int)i % phi;
        bool sq = (int)i >= phi;
        std::string mon;
        if (zi == 1) mon = "z";
        else if (zi > 1) mon = "z^" + std::to_string(zi);
        if (sq) mon = mon.empty() ? "s" : mon + "*s";
        mpq_class c = c_[i];
        if (!first) os << (c < 0 ? "-" : "+");
        else if (c < 0) os << "-";
        mpq_class a = abs(c);
        if (mon.empty()) os << a.get_str();
        else if (a == 1) os << mon;
        else os << a.get_str() << "*" << mon;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

CycScalar CycScalar::parse(const std::string& s) {
    auto at = s.find('@');
    if (at == std::string::npos) throw std::invalid_argument("scalar string lacks '@'");
    std::string tail = s.substr(at + 1);
    auto comma = tail.find(',');
    int n = std::stoi(tail.substr(0, comma));
    long d = comma == std::string::npos ? 0 : std::stol(tail.substr(comma + 1));
    const CycField* F = CycField::get(n, d);
    CycScalar out(F);
    std::stringstream ss(s.substr(0, at));
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= F->degree()) throw std::invalid_argument("too many coefficients in scalar string");
        out.c_[i++] = mpq_class(tok);
        out.c_[i - 1].canonicalize();
    }
    if (i != F->degree()) throw std::invalid_argument("wrong number of coefficients in scalar string");
    return out;
}

std::vector<long> unit_residues(int n) {
    std::vector<long> out;
    for (long j = 1; j <= n; ++j)
        if (std::gcd(j, (long)n) == 1) out.push_back(j % n);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<u64> power_basis_coords(const Fp& F, int n, u64 r, const std::vector<u64>& vals) {
    auto js = unit_residues(n);
    int phi = (int)js.size();
    if ((int)vals.size() != phi) throw std::invalid_argument("power_basis_coords: wrong number of values");
    ModMat A(phi, phi + 1);
    for (int k = 0; k < phi; ++k) {
        u64 z = F.pow(r, (u64)js[k]), p = 1;
        for (int i = 0; i < phi; ++i) {
            A.at(k, i) = p;
            p = F.mul(p, z);
        }
        A.at(k, phi) = vals[k];
    }
    auto piv = rref(F, A);
    if ((int)piv.size() != phi || piv.back() >= phi) throw std::runtime_error("power_basis_coords: singular system");
    std::vector<u64> out(phi);
    for (int i = 0; i < phi; ++i) out[i] = A.at(i, phi);
    return out;
}

CycReconstructor::CycReconstructor(const CycField* K, int count) : K_(K), count_(count), acc_((size_t)count * K->phi()) {}

void CycReconstructor::add(u64 q, const std::vector<u64>& coords) {
    if (coords.size() != acc_.size()) throw std::invalid_argument("CycReconstructor: wrong size");
    for (size_t i = 0; i < acc_.size(); ++i) acc_[i] = qs_.empty() ? mpz_class((unsigned long)coords[i]) : crt(acc_[i], M_, coords[i], q);
    M_ *= mpz_class((unsigned long)q);
    qs_.push_back(q);
}

std::optional<std::vector<CycScalar>> CycReconstructor::result() const {
    std::vector<CycScalar> out;
    int phi = K_->phi();
    for (int k = 0; k < count_; ++k) {
        CycScalar s(K_);
        for (int i = 0; i < phi; ++i) {
            auto r = rational_reconstruct(acc_[(size_t)k * phi + i], M_);
            if (!r) return std::nullopt;
            s[i] = *r;
        }
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------

ExactMatrix::ExactMatrix(const CycField* F_, int r_, int c_) : F(F_), r(r_), c(c_), a((size_t)r_ * c_, CycScalar(F_)) {}

ExactMatrix ExactMatrix::identity(const CycField* F, int n) {
    ExactMatrix I(F, n, n);
    for (int i = 0; i < n; ++i) I.at(i, i) = CycScalar(F, 1);
    return I;
}

ExactMatrix ExactMatrix::operator*(const ExactMatrix& o) const {
    if (c != o.r) throw std::invalid_argument("ExactMatrix: dimension mismatch");
    ExactMatrix out(F, r, o.c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) {
            if (at(i, k).is_zero()) continue;
            for (int j = 0; j < o.c; ++j)
                if (!o.at(k, j).is_zero()) out.at(i, j) += at(i, k) * o.at(k, j);
        }
    return out;
}

ExactMatrix ExactMatrix::operator-(const ExactMatrix& o) const {
    if (r != o.r || c != o.c) throw std::invalid_argument("ExactMatrix: dimension mismatch");
    ExactMatrix out = *this;
    for (size_t i = 0; i < a.size(); ++i) out.a[i] -= o.a[i];
    return out;
}

ModMat ExactMatrix::reduce(const Fp& Fq, u64 z, u64 s) const {
    ModMat M(r, c);
    for (size_t i = 0; i < a.size(); ++i) M.a[i] = a[i].reduce(Fq, z, s);
    return M;
}

std::vector<int> rref_exact(ExactMatrix& A) {
    std::vector<int> piv;
    int r = 0;
    for (int c = 0; c < A.c && r < A.r; ++c) {
        int p = -1;
        for (int i = r; i < A.r; ++i)
            if (!A.at(i, c).is_zero()) { p = i; break; }
        if (p < 0) continue;
        if (p != r)
            for (int j = 0; j < A.c; ++j) std::swap(A.at(p, j), A.at(r, j));
        CycScalar iv = A.at(r, c).inverse();
        for (int j = c; j < A.c; ++j)
            if (!A.at(r, j).is_zero()) A.at(r, j) = A.at(r, j) * iv;
        for (int i = 0; i < A.r; ++i) {
            if (i == r || A.at(i, c).is_zero()) continue;
            CycScalar f = A.at(i, c);
            for (int j = c; j < A.c; ++j)
                if (!A.at(r, j).is_zero()) A.at(i, j) -= f * A.at(r, j);
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

int rank_exact(ExactMatrix M) { return (int)rref_exact(M).size(); }

ExactMatrix kernel_exact(const ExactMatrix& M0) {
    ExactMatrix A = M0;
    auto piv = rref_exact(A);
    std::vector<char> isp(A.c, 0);
    for (int p : piv) isp[p] = 1;
    std::vector<int> freec;
    for (int c = 0; c < A.c; ++c)
        if (!isp[c]) freec.push_back(c);
    ExactMatrix K(A.F, A.c, (int)freec.size());
    for (size_t k = 0; k < freec.size(); ++k) {
        K.at(freec[k], (int)k) = CycScalar(A.F, 1);
        for (size_t i = 0; i < piv.size(); ++i) K.at(piv[i], (int)k) = -A.at((int)i, freec[k]);
    }
    return K;
}

RankResult rank_multimodular(const ExactMatrix& M, int nprimes, int exact_limit) {
    RankResult res{0, 0, false, {}};
    auto qs = choose_primes(nprimes, (u64)M.F->n(), M.F->d());
    std::vector<int> bestpiv_cols, bestpiv_rows;
    for (u64 q : qs) {
        Fp F(q);
        u64 z = primitive_root_of_unity(F, M.F->n());
        u64 s = M.F->d() ? sqrt_mod(F, F.from((i64)M.F->d())) : 0;
        ModMat A = M.reduce(F, z, s);
        ModMat At = transpose(A);
        auto pc = rref(F, A);
        if ((int)pc.size() > res.modular_rank) {
            res.modular_rank = (int)pc.size();
            bestpiv_cols = pc;
            bestpiv_rows = rref(F, At);
        }
        res.primes.push_back(q);
    }
    res.rank = res.modular_rank;
    if (M.c < exact_limit) {
        int r = rank_exact(M);
        res.certified = (r == res.modular_rank);
        res.rank = r;
    } else {
        ExactMatrix S(M.F, (int)bestpiv_rows.size(), (int)bestpiv_cols.size());
        for (size_t i = 0; i < bestpiv_rows.size(); ++i)
            for (size_t j = 0; j < bestpiv_cols.size(); ++j) S.at((int)i, (int)j) = M.at(bestpiv_rows[i], bestpiv_cols[j]);
        res.certified = rank_exact(S) == res.modular_rank;
    }
    return res;
}

std::vector<CycScalar> charpoly_exact(const ExactMatrix& A0) {
    if (A0.r != A0.c) throw std::invalid_argument("charpoly: non-square matrix");
    int n = A0.r;
    const CycField* K = A0.F;
    ExactMatrix H = A0;
    for (int m = 1; m < n - 1; ++m) {
        int p = -1;
        for (int i = m; i < n; ++i)
            if (!H.at(i, m - 1).is_zero()) { p = i; break; }
        if (p < 0) continue;
        if (p != m) {
            for (int j = 0; j < n; ++j) std::swap(H.at(p, j), H.at(m, j));
            for (int i = 0; i < n; ++i) std::swap(H.at(i, p), H.at(i, m));
        }
        CycScalar iv = H.at(m, m - 1).inverse();
        for (int i = m + 1; i < n; ++i) {
            if (H.at(i, m - 1).is_zero()) continue;
            CycScalar u = H.at(i, m - 1) * iv;
            for (int j = 0; j < n; ++j) H.at(i, j) -= u * H.at(m, j);
            for (int k = 0; k < n; ++k) H.at(k, m) += u * H.at(k, i);
        }
    }
    std::vector<std::vector<CycScalar>> P(n + 1);
    P[0] = {CycScalar(K, 1)};
    for (int k = 1; k <= n; ++k) {
        std::vector<CycScalar> pk(k + 1, CycScalar(K));
        const auto& pm = P[k - 1];
        const CycScalar& h = H.at(k - 1, k - 1);
        for (int i = 0; i < k; ++i) {
            pk[i + 1] += pm[i];
            pk[i] -= h * pm[i];
        }
        CycScalar t(K, 1);
        for (int i = 1; i < k; ++i) {
            t = t * H.at(k - i, k - i - 1);
            CycScalar coef = t * H.at(k - i - 1, k - 1);
            if (coef.is_zero()) continue;
            const auto& pp = P[k - i - 1];
            for (size_t j = 0; j < pp.size(); ++j) pk[j] -= coef * pp[j];
        }
        P[k] = std::move(pk);
    }
    return P[n];
}

std::string ModpReduction::str() const {
    return "(" + std::to_string(p) + ", z-" + std::to_string(zeta_img) + ", s-" + std::to_string(sqrtd_img) + ")";
}

ModpReduction choose_reduction(const CycField* K, u64 p) {
    Fp F(p);
    const auto& P = K->cyclotomic();
    for (u64 g = 0; g < p; ++g) {
        u64 v = 0;
        for (size_t i = P.size(); i-- > 0;) v = F.add(F.mul(v, g), F.from((i64)P[i]));
        if (v != 0) continue;
        if (!K->d()) return {p, g, 0};
        for (u64 s = 0; s < p; ++s)
            if (F.mul(s, s) == F.from((i64)K->d())) return {p, g, s};
        break;
    }
    throw std::invalid_argument("no prime of residue degree one above p in the coefficient field");
}

u64 reduce_scalar(const CycScalar& x, const ModpReduction& red) {
    for (const auto& c : x.coeffs())
        if (mpz_divisible_ui_p(c.get_den().get_mpz_t(), red.p))
            throw std::domain_error("scalar is not p-integral: " + x.str());
    return x.reduce(Fp(red.p), red.zeta_img, red.sqrtd_img);
}

ModMat reduce_mod(const ExactMatrix& M, const ModpReduction& red) {
    ModMat out(M.r, M.c);
    for (size_t i = 0; i < M.a.size(); ++i) out.a[i] = reduce_scalar(M.a[i], red);
    return out;
}

nlohmann::json matrix_to_json(const ExactMatrix& M) {
    nlohmann::json j;
    j["format"] = "bianchi-matrix";
    j["version"] = 1;
    j["rows"] = M.r;
    j["cols"] = M.c;
    j["field"] = {{"n", M.F->n()}, {"d", M.F->d()}};
    nlohmann::json e = nlohmann::json::array();
    for (int r = 0; r < M.r; ++r)
        for (int c = 0; c < M.c; ++c)
            if (!M.at(r, c).is_zero()) e.push_back({r, c, M.at(r, c).str()});
    j["entries"] = e;
    return j;
}

ExactMatrix matrix_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "bianchi-matrix" || j.value("version", 0) != 1)
        throw std::invalid_argument("unsupported matrix serialization");
    const CycField* F = CycField::get(j["field"]["n"].get<int>(), j["field"]["d"].get<long>());
    ExactMatrix M(F, j["rows"].get<int>(), j["cols"].get<int>());
    for (const auto& e : j["entries"]) {
        int r = e[0].get<int>(), c = e[1].get<int>();
        if (r < 0 || r >= M.r || c < 0 || c >= M.c) throw std::out_of_range("matrix entry out of range");
        CycScalar s = CycScalar::parse(e[2].get<std::string>());
        if (s.field() != F) throw std::invalid_argument("entry field differs from matrix field");
        M.at(r, c) = s;
    }
    return M;
}

std::string poly_str(const std::vector<CycScalar>& co, const char* var) {
    std::ostringstream os;
    bool first = true;
    for (int i = (int)co.size() - 1; i >= 0; --i) {
        if (co[i].is_zero()) continue;
        std::string c = co[i].pretty();
        bool rat = co[i].is_rational();
        bool neg = rat && co[i][0] < 0;
        std::string mag = rat ? mpq_class(abs(co[i][0])).get_str() : "(" + c + ")";
        if (!first) os << (neg ? " - " : " + ");
        else if (neg) os << "-";
        std::string mon = i == 0 ? "" : (i == 1 ? std::string(var) : std::string(var) + "^" + std::to_string(i));
        if (mon.empty()) os << mag;
        else if (rat && mag == "1") os << mon;
        else os << mag << "*" << mon;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

}  // namespace bianchi
