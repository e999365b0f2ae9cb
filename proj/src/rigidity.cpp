#include "bianchi/rigidity.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace bianchi {

const mpz_class& ppow(long p, int e) {
    static std::map<std::pair<long, int>, mpz_class> cache;
    auto it = cache.find({p, e});
    if (it != cache.end()) return it->second;
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), (unsigned long)p, (unsigned long)e);
    return cache[{p, e}] = r;
}

int vp_mpz(const mpz_class& x, long p) {
    if (x == 0) throw std::invalid_argument("valuation of zero");
    if (!mpz_divisible_ui_p(x.get_mpz_t(), (unsigned long)p)) return 0;
    mpz_class t = x, f = p;
    return (int)mpz_remove(t.get_mpz_t(), t.get_mpz_t(), f.get_mpz_t());
}

namespace {

int vp_factorial(long i, long p) {
    int v = 0;
    for (long q = p; q <= i; q *= p) v += (int)(i / q);
    return v;
}

// C(N, i) for N in Z_p
PadicInt binom(const PadicInt& N, long i) {
    mpz_class r;
    mpz_bin_ui(r.get_mpz_t(), N.value().get_mpz_t(), (unsigned long)i);
    if (N.exact()) return PadicInt(N.p(), r);
    return PadicInt(N.p(), r, std::max(0, N.prec() - vp_factorial(i, N.p())));
}

mpz_class random_mpz(std::mt19937_64& rng, const mpz_class& mod) {
    mpz_class r = 0;
    size_t words = mpz_sizeinbase(mod.get_mpz_t(), 2) / 64 + 2;
    for (size_t k = 0; k < words; ++k) r = (r << 64) + mpz_class(std::to_string(rng()));
    return r % mod;
}

mpz_class bareiss(std::vector<std::vector<mpz_class>> A) {
    int n = (int)A.size();
    int sign = 1;
    mpz_class prev = 1;
    for (int k = 0; k < n; ++k) {
        if (A[k][k] == 0) {
            int r = k + 1;
            while (r < n && A[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(A[k], A[r]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                mpz_class t = A[i][j] * A[k][k] - A[i][k] * A[k][j];
                mpz_divexact(A[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            A[i][k] = 0;
        }
        prev = A[k][k];
    }
    return sign * A[n - 1][n - 1];
}

PVal finite(mpq_class v) {
    v.canonicalize();
    return {PVal::Finite, v};
}
PVal at_least(mpq_class v) {
    v.canonicalize();
    return {PVal::AtLeast, v};
}

PVal min_known(const PVal& a, const PVal& b) {
    if (a.kind == PVal::Infinite) return b;
    if (b.kind == PVal::Infinite) return a;
    return a.v <= b.v ? a : b;
}

const CycRing* common(const CycRing* a, const CycRing* b) { return a->m >= b->m ? a : b; }

std::vector<CycPadic> mul_trunc(const std::vector<CycPadic>& a, const std::vector<CycPadic>& b, int D) {
    const CycRing* R = a[0].ring();
    std::vector<CycPadic> r(D + 1, CycPadic(R));
    for (int i = 0; i <= D; ++i) {
        if (a[i].exact_zero()) continue;
        for (int j = 0; i + j <= D; ++j) {
            if (b[j].exact_zero()) continue;
            r[i + j] = r[i + j] + a[i] * b[j];
        }
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------

PadicInt::PadicInt(long p, const mpz_class& v, int prec) : p_(p), v_(v), prec_(prec) { normalize(); }

void PadicInt::normalize() {
    if (prec_ == kExact) return;
    if (prec_ <= 0) {
        prec_ = 0;
        v_ = 0;
        return;
    }
    mpz_fdiv_r(v_.get_mpz_t(), v_.get_mpz_t(), ppow(p_, prec_).get_mpz_t());
}

mpz_class PadicInt::signed_value() const {
    if (exact()) return v_;
    const mpz_class& q = ppow(p_, prec_);
    return 2 * v_ > q ? mpz_class(v_ - q) : v_;
}

bool PadicInt::is_unit() const { return v_ != 0 && !mpz_divisible_ui_p(v_.get_mpz_t(), (unsigned long)p_); }

std::optional<int> PadicInt::valuation() const {
    if (v_ == 0) return std::nullopt;
    return vp_mpz(v_, p_);
}

long PadicInt::val_bound() const {
    if (v_ == 0) return exact() ? (long)kExact : prec_;
    return vp_mpz(v_, p_);
}

PadicInt PadicInt::with_prec(int m) const {
    if (m >= prec_) return *this;
    return PadicInt(p_, v_, m);
}

PadicInt PadicInt::shift_down(int k) const {
    if (k == 0) return *this;
    if (!mpz_divisible_p(v_.get_mpz_t(), ppow(p_, k).get_mpz_t())) throw std::domain_error("not divisible by p^k");
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), v_.get_mpz_t(), ppow(p_, k).get_mpz_t());
    return PadicInt(p_, q, exact() ? kExact : prec_ - k);
}

PadicInt PadicInt::inverse(int M) const {
    if (!is_unit()) throw std::domain_error("inverse of a non-unit");
    if (exact() && (v_ == 1 || v_ == -1)) return *this;
    int pr = std::min(prec_, M);
    mpz_class r;
    mpz_invert(r.get_mpz_t(), v_.get_mpz_t(), ppow(p_, pr).get_mpz_t());
    return PadicInt(p_, r, pr);
}

std::string PadicInt::str() const {
    if (exact()) return v_.get_str();
    return signed_value().get_str() + " + O(" + std::to_string(p_) + "^" + std::to_string(prec_) + ")";
}

PadicInt operator+(const PadicInt& a, const PadicInt& b) {
    return PadicInt(a.p_ ? a.p_ : b.p_, a.v_ + b.v_, std::min(a.prec_, b.prec_));
}

PadicInt operator-(const PadicInt& a, const PadicInt& b) {
    return PadicInt(a.p_ ? a.p_ : b.p_, a.v_ - b.v_, std::min(a.prec_, b.prec_));
}

PadicInt PadicInt::operator-() const { return PadicInt(p_, -v_, prec_); }

PadicInt operator*(const PadicInt& a, const PadicInt& b) {
    long p = a.p_ ? a.p_ : b.p_;
    if (a.exact_zero() || b.exact_zero()) return PadicInt(p, 0);
    if (a.exact() && b.exact()) return PadicInt(p, a.v_ * b.v_);
    long x = a.exact() ? LONG_MAX : (long)a.prec_ + b.val_bound();
    long y = b.exact() ? LONG_MAX : (long)b.prec_ + a.val_bound();
    long pr = std::min({x, y, (long)PadicInt::kExact - 1});
    return PadicInt(p, a.v_ * b.v_, (int)pr);
}

std::string PVal::str() const {
    switch (kind) {
        case Infinite: return "inf";
        case Finite: return v.get_str();
        default: return ">=" + v.get_str();
    }
}

PVal operator+(const PVal& a, const PVal& b) {
    if (a.kind == PVal::Infinite || b.kind == PVal::Infinite) return {};
    PVal r;
    r.kind = a.kind == PVal::Finite && b.kind == PVal::Finite ? PVal::Finite : PVal::AtLeast;
    r.v = a.v + b.v;
    return r;
}

// ---------------------------------------------------------------------------

const CycRing* CycRing::get(long p, int m) {
    static std::map<std::pair<long, int>, std::unique_ptr<CycRing>> cache;
    auto& slot = cache[{p, m}];
    if (slot) return slot.get();
    auto R = std::make_unique<CycRing>();
    R->p = p;
    R->m = m;
    if (m == 0) {
        R->n = 1;
        R->mp = {0};
    } else {
        long q = 1;
        for (int i = 1; i < m; ++i) q *= p;
        R->n = (int)((p - 1) * q);
        std::vector<mpz_class> c(R->n + 1, 0);
        for (long k = 0; k < p; ++k)
            for (long i = 0; i <= k * q; ++i) {
                mpz_class b;
                mpz_bin_uiui(b.get_mpz_t(), (unsigned long)(k * q), (unsigned long)i);
                c[i] += b;
            }
        R->mp.assign(c.begin(), c.begin() + R->n);
    }
    slot = std::move(R);
    return slot.get();
}

CycPadic::CycPadic(const CycRing* R) : R_(R), c_(R->n, PadicInt(R->p, 0)) {}

CycPadic::CycPadic(const CycRing* R, const PadicInt& c0) : CycPadic(R) { c_[0] = c0; }

CycPadic CycPadic::lambda(const CycRing* R) {
    CycPadic r(R);
    if (R->m == 0) return r;
    if (R->n == 1)
        r[0] = PadicInt(R->p, -R->mp[0]);
    else
        r[1] = PadicInt::exact(R->p, 1);
    return r;
}

CycPadic CycPadic::zeta_pow(const CycRing* R, long k) {
    CycPadic one(R, PadicInt::exact(R->p, 1));
    if (R->m == 0) return one;
    long q = ppow(R->p, R->m).get_si();
    k %= q;
    if (k < 0) k += q;
    return (one + lambda(R)).pow(k);
}

bool CycPadic::is_zero() const {
    for (auto& c : c_)
        if (!c.is_zero()) return false;
    return true;
}

bool CycPadic::exact_zero() const {
    for (auto& c : c_)
        if (!c.exact_zero()) return false;
    return true;
}

bool CycPadic::is_scalar() const {
    for (size_t i = 1; i < c_.size(); ++i)
        if (!c_[i].exact_zero()) return false;
    return true;
}

PVal CycPadic::valuation() const {
    long n = R_->n, best = LONG_MAX, bound = LONG_MAX;
    for (long i = 0; i < n; ++i) {
        const PadicInt& c = c_[i];
        if (c.exact_zero()) continue;
        if (c.is_zero())
            bound = std::min(bound, (long)c.prec() * n + i);
        else
            best = std::min(best, (long)vp_mpz(c.value(), R_->p) * n + i);
    }
    if (best == LONG_MAX && bound == LONG_MAX) return {};
    if (best < bound) return finite(mpq_class(best, n));
    return at_least(mpq_class(bound, n));
}

PVal CycPadic::known_to() const {
    long n = R_->n, bound = LONG_MAX;
    for (long i = 0; i < n; ++i)
        if (!c_[i].exact()) bound = std::min(bound, (long)c_[i].prec() * n + i);
    if (bound == LONG_MAX) return {};
    return at_least(mpq_class(bound, n));
}

PadicInt CycPadic::norm() const {
    int n = R_->n;
    if (n == 1) return c_[0];
    std::vector<std::vector<mpz_class>> A(n, std::vector<mpz_class>(n));
    int prec = PadicInt::kExact;
    CycPadic col = *this;
    CycPadic lam = lambda(R_);
    for (int j = 0; j < n; ++j) {
        if (j) col = col * lam;
        for (int i = 0; i < n; ++i) {
            A[i][j] = col[i].value();
            prec = std::min(prec, col[i].prec());
        }
    }
    return PadicInt(R_->p, bareiss(A), prec);
}

PVal CycPadic::norm_valuation() const {
    PadicInt N = norm();
    if (N.exact_zero()) return {};
    if (N.is_zero()) return at_least(mpq_class(N.prec(), R_->n));
    return finite(mpq_class(vp_mpz(N.value(), R_->p), R_->n));
}

CycPadic CycPadic::cap(const mpq_class& T) const {
    CycPadic r = *this;
    long n = R_->n;
    for (long i = 0; i < n; ++i) {
        mpq_class q = T - mpq_class(i, n);
        q.canonicalize();
        mpz_class c;
        mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
        int pr = c <= 0 ? 0 : (c > 100000 ? 100000 : (int)c.get_si());
        r.c_[i] = r.c_[i].with_prec(pr);
    }
    return r;
}

CycPadic CycPadic::with_prec(int M) const {
    CycPadic r = *this;
    for (auto& c : r.c_)
        if (!c.exact()) c = c.with_prec(M);
    return r;
}

CycPadic CycPadic::embed(const CycRing* to) const {
    if (to == R_) return *this;
    if (R_->m > to->m) throw std::invalid_argument("cannot embed into a smaller cyclotomic ring");
    if (is_scalar()) return CycPadic(to, c_[0]);
    CycPadic one(to, PadicInt::exact(to->p, 1));
    long e = ppow(to->p, to->m - R_->m).get_si();
    CycPadic mu = (one + lambda(to)).pow(e) - one;
    CycPadic r(to, c_[R_->n - 1]);
    for (int i = R_->n - 2; i >= 0; --i) r = r * mu + CycPadic(to, c_[i]);
    return r;
}

std::optional<PadicInt> CycPadic::as_zp() const {
    for (size_t i = 1; i < c_.size(); ++i)
        if (!c_[i].is_zero()) return std::nullopt;
    return c_[0];
}

CycPadic CycPadic::div_lambda() const {
    if (R_->m == 0) throw std::domain_error("lambda is zero in Z_p");
    int n = R_->n;
    // p / lambda = -lambda^{n-1} - sum_{i>=1} mp[i] lambda^{i-1}
    CycPadic q(R_);
    for (int j = 0; j + 1 < n; ++j) q[j] = PadicInt(R_->p, -R_->mp[j + 1]);
    q[n - 1] = q[n - 1] - PadicInt::exact(R_->p, 1);
    CycPadic r(R_);
    for (int j = 0; j + 1 < n; ++j) r[j] = c_[j + 1];
    return r + q * CycPadic(R_, c_[0].shift_down(1));
}

CycPadic CycPadic::inverse(int M) const {
    if (!c_[0].is_unit()) throw std::domain_error("inverse of a non-unit");
    if (is_scalar()) return CycPadic(R_, c_[0].inverse(M));
    CycPadic y(R_, c_[0].inverse(M).with_prec(M));
    CycPadic two(R_, PadicInt::exact(R_->p, 2));
    long steps = 2;
    for (long t = 1; t < (long)R_->n * M; t *= 2) ++steps;
    for (long s = 0; s < steps; ++s) y = (y * (two - *this * y)).with_prec(M);
    return y;
}

std::optional<CycPadic> CycPadic::divide(const CycPadic& b, int M) const {
    PVal bv = b.valuation();
    if (bv.kind != PVal::Finite) return std::nullopt;
    PVal av = valuation();
    if (av.kind == PVal::Finite && av.v < bv.v) return std::nullopt;
    mpq_class sq = bv.v * R_->n;
    long s = mpz_class(sq.get_num() / sq.get_den()).get_si();
    try {
        CycPadic a = *this, d = b;
        for (long i = 0; i < s; ++i) {
            a = a.div_lambda();
            d = d.div_lambda();
        }
        return a * d.inverse(M);
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

CycPadic CycPadic::pow(long e) const {
    CycPadic r(R_, PadicInt::exact(R_->p, 1)), b = *this;
    while (e > 0) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

std::string CycPadic::str() const {
    if (is_scalar()) return c_[0].str();
    std::string s;
    for (int i = 0; i < R_->n; ++i) {
        if (c_[i].exact_zero()) continue;
        if (!s.empty()) s += " + ";
        s += "(" + c_[i].str() + ")";
        if (i) s += "*l^" + std::to_string(i);
    }
    return s;
}

CycPadic operator+(const CycPadic& a, const CycPadic& b) {
    if (a.R_ != b.R_) {
        const CycRing* R = common(a.R_, b.R_);
        return a.embed(R) + b.embed(R);
    }
    CycPadic r(a.R_);
    for (int i = 0; i < a.R_->n; ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
}

CycPadic operator-(const CycPadic& a, const CycPadic& b) {
    if (a.R_ != b.R_) {
        const CycRing* R = common(a.R_, b.R_);
        return a.embed(R) - b.embed(R);
    }
    CycPadic r(a.R_);
    for (int i = 0; i < a.R_->n; ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
}

CycPadic CycPadic::operator-() const {
    CycPadic r(R_);
    for (int i = 0; i < R_->n; ++i) r.c_[i] = -c_[i];
    return r;
}

CycPadic operator*(const CycPadic& a, const CycPadic& b) {
    if (a.R_ != b.R_) {
        const CycRing* R = common(a.R_, b.R_);
        return a.embed(R) * b.embed(R);
    }
    const CycRing* R = a.R_;
    int n = R->n;
    CycPadic r(R);
    if (a.is_scalar() || b.is_scalar()) {
        const CycPadic& s = a.is_scalar() ? a : b;
        const CycPadic& o = a.is_scalar() ? b : a;
        for (int i = 0; i < n; ++i) r.c_[i] = s.c_[0] * o.c_[i];
        return r;
    }
    auto all_exact = [n](const CycPadic& x) {
        for (int i = 0; i < n; ++i)
            if (!x.c_[i].exact()) return false;
        return true;
    };
    if (all_exact(a) && all_exact(b)) {
        // plain integer convolution, no precision bookkeeping
        std::vector<mpz_class> t(2 * n - 1);
        for (int i = 0; i < n; ++i) {
            if (a.c_[i].is_zero()) continue;
            for (int j = 0; j < n; ++j)
                mpz_addmul(t[i + j].get_mpz_t(), a.c_[i].value().get_mpz_t(), b.c_[j].value().get_mpz_t());
        }
        for (int d = 2 * n - 2; d >= n; --d) {
            if (t[d] == 0) continue;
            for (int i = 0; i < n; ++i)
                if (R->mp[i] != 0) mpz_submul(t[d - n + i].get_mpz_t(), t[d].get_mpz_t(), R->mp[i].get_mpz_t());
        }
        for (int i = 0; i < n; ++i) r.c_[i] = PadicInt(R->p, t[i]);
        return r;
    }
    std::vector<PadicInt> t(2 * n - 1, PadicInt(R->p, 0));
    for (int i = 0; i < n; ++i) {
        if (a.c_[i].exact_zero()) continue;
        for (int j = 0; j < n; ++j) {
            if (b.c_[j].exact_zero()) continue;
            t[i + j] = t[i + j] + a.c_[i] * b.c_[j];
        }
    }
    for (int d = 2 * n - 2; d >= n; --d) {
        if (t[d].exact_zero()) continue;
        for (int i = 0; i < n; ++i)
            if (R->mp[i] != 0) t[d - n + i] = t[d - n + i] - t[d] * PadicInt(R->p, R->mp[i]);
    }
    for (int i = 0; i < n; ++i) r.c_[i] = t[i];
    return r;
}

// ---------------------------------------------------------------------------

PSeries2::PSeries2(const CycRing* O, int D, int M) : R_(O), D_(D), M_(M), c_((D + 1) * (D + 2) / 2, CycPadic(O)) {}

void PSeries2::set(int i, int j, long v) { at(i, j) = CycPadic(R_, PadicInt::exact(R_->p, v)); }

int PSeries2::degree() const {
    for (int s = D_; s >= 0; --s)
        for (int j = 0; j <= s; ++j)
            if (!at(s - j, j).exact_zero()) return s;
    return -1;
}

PSeries2 PSeries2::swapped() const {
    PSeries2 r(R_, D_, M_);
    r.poly_ = poly_;
    for (int s = 0; s <= D_; ++s)
        for (int j = 0; j <= s; ++j) r.at(j, s - j) = at(s - j, j);
    return r;
}

PSeries2 PSeries2::truncated(int D, int M) const {
    if (D > D_) throw std::invalid_argument("cannot raise the degree bound");
    PSeries2 r(R_, D, std::min(M, M_));
    r.poly_ = poly_ && degree() <= D;
    for (int s = 0; s <= D; ++s)
        for (int j = 0; j <= s; ++j) r.at(s - j, j) = at(s - j, j).with_prec(r.M_);
    return r;
}

PSeries2 PSeries2::over(const CycRing* O) const {
    PSeries2 r(O, D_, M_);
    r.poly_ = poly_;
    for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i].embed(O);
    return r;
}

PSeries2 operator+(const PSeries2& a, const PSeries2& b) {
    const CycRing* R = common(a.R_, b.R_);
    PSeries2 r(R, std::min(a.D_, b.D_), std::min(a.M_, b.M_));
    r.poly_ = a.poly_ && b.poly_;
    for (int s = 0; s <= r.D_; ++s)
        for (int j = 0; j <= s; ++j) r.at(s - j, j) = (a.at(s - j, j) + b.at(s - j, j)).with_prec(r.M_);
    if (!r.poly_) return r;
    // a polynomial that no longer fits is a truncation
    if (std::max(a.degree(), b.degree()) > r.D_) r.poly_ = false;
    return r;
}

PSeries2 operator-(const PSeries2& a, const PSeries2& b) {
    PSeries2 nb = b;
    for (auto& c : nb.c_) c = -c;
    return a + nb;
}

PSeries2 operator*(const PSeries2& a, const PSeries2& b) {
    const CycRing* R = common(a.R_, b.R_);
    int D = std::min(a.D_, b.D_);
    PSeries2 r(R, D, std::min(a.M_, b.M_));
    r.poly_ = a.poly_ && b.poly_ && a.degree() + b.degree() <= D;
    std::vector<std::pair<int, const CycPadic*>> bt;
    for (int s = 0; s <= D; ++s)
        for (int j = 0; j <= s; ++j)
            if (!b.at(s - j, j).exact_zero()) bt.push_back({PSeries2::idx(s - j, j), &b.at(s - j, j)});
    for (int s1 = 0; s1 <= D; ++s1)
        for (int j1 = 0; j1 <= s1; ++j1) {
            const CycPadic& x = a.at(s1 - j1, j1);
            if (x.exact_zero()) continue;
            for (int s2 = 0; s1 + s2 <= D; ++s2)
                for (int j2 = 0; j2 <= s2; ++j2) {
                    const CycPadic& y = b.at(s2 - j2, j2);
                    if (y.exact_zero()) continue;
                    CycPadic& t = r.at(s1 - j1 + s2 - j2, j1 + j2);
                    t = t + x * y;
                }
        }
    for (auto& c : r.c_) c = c.with_prec(r.M_);
    return r;
}

nlohmann::json PSeries2::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (int s = 0; s <= D_; ++s)
        for (int jj = 0; jj <= s; ++jj) {
            const CycPadic& c = at(s - jj, jj);
            if (c.exact_zero()) continue;
            std::string key = std::to_string(s - jj) + "," + std::to_string(jj);
            if (R_->m == 0) {
                j[key] = c[0].signed_value().get_str();
            } else {
                nlohmann::json arr = nlohmann::json::array();
                for (int i = 0; i < R_->n; ++i) arr.push_back(c[i].signed_value().get_str());
                j[key] = arr;
            }
        }
    return j;
}

PSeries2 PSeries2::from_json(const nlohmann::json& j, long p, int D, int M) {
    int m = 0;
    for (auto& [k, v] : j.items()) {
        if (!v.is_array()) continue;
        int len = (int)v.size();
        int mm = 0;
        while (CycRing::get(p, mm)->n < len) ++mm;
        if (CycRing::get(p, mm)->n != len) throw std::invalid_argument("coefficient length is not phi(p^m): " + k);
        m = std::max(m, mm);
    }
    const CycRing* R = CycRing::get(p, m);
    PSeries2 f(R, D, M);
    f.poly_ = false;
    auto parse = [&](const nlohmann::json& x) {
        std::string s = x.is_string() ? x.get<std::string>() : x.dump();
        return PadicInt(p, mpz_class(s), M);
    };
    for (auto& [k, v] : j.items()) {
        auto comma = k.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("bad monomial key " + k);
        int a = std::stoi(k.substr(0, comma)), b = std::stoi(k.substr(comma + 1));
        if (a < 0 || b < 0) throw std::invalid_argument("bad monomial key " + k);
        if (a + b > D) continue;
        CycPadic c(R);
        if (v.is_array()) {
            const CycRing* Rv = CycRing::get(p, 0);
            int mm = 0;
            while (CycRing::get(p, mm)->n < (int)v.size()) ++mm;
            Rv = CycRing::get(p, mm);
            CycPadic cv(Rv);
            for (size_t i = 0; i < v.size(); ++i) cv[(int)i] = parse(v[i]);
            c = cv.embed(R);
        } else {
            c = CycPadic(R, parse(v));
        }
        f.at(a, b) = c;
    }
    return f;
}

PSeries2 PSeries2::translate(long p, int D, int M, const PadicInt& N, int m, long a, int e) {
    const CycRing* R = CycRing::get(p, std::max(m, e));
    PSeries2 f(R, D, M);
    CycPadic xi = CycPadic::zeta_pow(CycRing::get(p, m), a).embed(R);
    bool poly = N.exact() && N.value() >= 0 && N.value() <= D;
    for (int i = 0; i <= D; ++i) f.at(i, 0) = (xi * CycPadic(R, binom(N, i))).with_prec(M);
    f.at(0, 0) = f.at(0, 0) - CycPadic(R, PadicInt::exact(p, 1));
    f.at(0, 1) = CycPadic(R, PadicInt::exact(p, -1));
    f.poly_ = poly;
    return f;
}

PSeries2 PSeries2::random(const CycRing* O, int D, int M, std::mt19937_64& rng, bool through_origin) {
    PSeries2 f(O, D, M);
    f.poly_ = false;
    const mpz_class& q = ppow(O->p, M);
    for (auto& c : f.c_)
        for (int i = 0; i < O->n; ++i) c[i] = PadicInt(O->p, random_mpz(rng, q), M);
    if (through_origin) f.at(0, 0) = CycPadic(O);
    return f;
}

PSeries2 PSeries2::random_unit_poly(const CycRing* O, int D, int M, int deg, std::mt19937_64& rng) {
    PSeries2 f(O, D, M);
    std::uniform_int_distribution<long> small(-3, 3);
    for (int s = 0; s <= std::min(deg, D); ++s)
        for (int j = 0; j <= s; ++j) {
            CycPadic& c = f.at(s - j, j);
            for (int i = 0; i < O->n; ++i) c[i] = PadicInt::exact(O->p, small(rng));
        }
    long u;
    do u = small(rng);
    while (u % O->p == 0);
    f.at(0, 0)[0] = PadicInt::exact(O->p, u);
    return f;
}

// ---------------------------------------------------------------------------

std::string ClassicalPoint::str() const {
    std::ostringstream os;
    os << "k=" << k << " zeta=z" << m << "^" << a << " zeta'=z" << m2 << "^" << a2;
    return os.str();
}

namespace {

PadicInt one_plus_p_pow(long p, const PadicInt& K, int M) {
    if (K.exact() && K.value() >= 0) {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), mpz_class(1 + p).get_mpz_t(), K.value().get_ui());
        return PadicInt(p, r);
    }
    if (K.exact()) {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), mpz_class(1 + p).get_mpz_t(), mpz_class(-K.value()).get_ui());
        return PadicInt(p, r).inverse(M);
    }
    // (1+p)^K mod p^{prec(K)+1} depends on K mod p^prec(K) only
    int pr = std::min(M, K.prec() + 1);
    mpz_class r;
    mpz_powm(r.get_mpz_t(), mpz_class(1 + p).get_mpz_t(), K.value().get_mpz_t(), ppow(p, pr).get_mpz_t());
    return PadicInt(p, r, pr);
}

CycPadic coordinate(const CycRing* R, long p, const PadicInt& u, int m, long a) {
    CycPadic z = CycPadic::zeta_pow(CycRing::get(p, m), a).embed(R);
    return CycPadic(R, u) * z - CycPadic(R, PadicInt::exact(p, 1));
}

std::optional<mpq_class> val_floor(const CycPadic& x) {
    PVal v = x.valuation();
    if (v.kind == PVal::Infinite) return std::nullopt;
    return v.v;
}

}  // namespace

CycPadic eval_at(const PSeries2& f, const ClassicalPoint& pt) {
    long p = f.p();
    int L = std::max({f.ring()->m, pt.m, pt.m2});
    const CycRing* R = CycRing::get(p, L);
    PadicInt u = one_plus_p_pow(p, PadicInt::exact(p, pt.k), f.M());
    CycPadic x = coordinate(R, p, u, pt.m, pt.a), y = coordinate(R, p, u, pt.m2, pt.a2);
    int D = f.D();
    std::vector<CycPadic> yp(D + 1, CycPadic(R, PadicInt::exact(p, 1)));
    for (int j = 1; j <= D; ++j) yp[j] = yp[j - 1] * y;
    CycPadic res(R);
    for (int i = D; i >= 0; --i) {
        CycPadic row(R);
        for (int j = 0; i + j <= D; ++j) {
            const CycPadic& c = f.at(i, j);
            if (c.exact_zero()) continue;
            row = row + c.embed(R) * yp[j];
        }
        res = res * x + row;
    }
    if (!f.polynomial()) {
        auto vx = val_floor(x), vy = val_floor(y);
        std::optional<mpq_class> v;
        if (vx) v = vx;
        if (vy && (!v || *vy < *v)) v = vy;
        if (v) res = res.cap(*v * (D + 1));
    }
    return res;
}

PVal eval_special(const PSeries2& f, const ClassicalPoint& pt) { return eval_at(f, pt).valuation(); }

PSeries2 recenter(const PSeries2& f, const PadicInt& K) {
    if (K.exact_zero()) return f;
    long p = f.p();
    int D = f.D();
    const CycRing* R = f.ring();
    PadicInt u = one_plus_p_pow(p, K, f.M());
    PadicInt c = u - PadicInt::exact(p, 1);
    // A[i][t] = C(i,t) u^t c^(i-t): coefficient of X^t in (uX + c)^i
    std::vector<std::vector<PadicInt>> A(D + 1);
    std::vector<PadicInt> up(D + 1, PadicInt::exact(p, 1)), cp(D + 1, PadicInt::exact(p, 1));
    for (int i = 1; i <= D; ++i) {
        up[i] = up[i - 1] * u;
        cp[i] = cp[i - 1] * c;
    }
    for (int i = 0; i <= D; ++i)
        for (int t = 0; t <= i; ++t) {
            mpz_class b;
            mpz_bin_uiui(b.get_mpz_t(), i, t);
            A[i].push_back(PadicInt(p, b) * up[t] * cp[i - t]);
        }
    PSeries2 G(R, D, f.M()), r(R, D, f.M());
    for (int s = 0; s <= D; ++s)
        for (int j = 0; s + j <= D; ++j) {
            CycPadic acc(R);
            for (int i = s; i + j <= D; ++i)
                if (!f.at(i, j).exact_zero()) acc = acc + f.at(i, j) * CycPadic(R, A[i][s]);
            G.at(s, j) = acc;
        }
    for (int s = 0; s <= D; ++s)
        for (int t = 0; s + t <= D; ++t) {
            CycPadic acc(R);
            for (int j = t; s + j <= D; ++j)
                if (!G.at(s, j).exact_zero()) acc = acc + G.at(s, j) * CycPadic(R, A[j][t]);
            r.at(s, t) = acc.with_prec(f.M());
        }
    r.set_polynomial(f.polynomial());
    if (!f.polynomial()) {
        mpq_class vc = c.is_zero() ? mpq_class(c.prec()) : mpq_class(*c.valuation());
        for (int s = 0; s <= D; ++s)
            for (int t = 0; s + t <= D; ++t) r.at(s, t) = r.at(s, t).cap(vc * (D + 1 - s - t));
    }
    return r;
}

TorusSub torus_substitute(const PSeries2& f, const PadicInt& N, int m, long a) {
    long p = f.p();
    int D = f.D();
    const CycRing* R = CycRing::get(p, std::max(f.ring()->m, m));
    CycPadic one(R, PadicInt::exact(p, 1));
    CycPadic xi = CycPadic::zeta_pow(CycRing::get(p, m), a).embed(R);
    std::vector<CycPadic> B(D + 1, CycPadic(R));
    B[0] = xi - one;
    for (int i = 1; i <= D; ++i) B[i] = (xi * CycPadic(R, binom(N, i))).with_prec(f.M());
    // Horner in Y: H = F_0 + B (F_1 + B (F_2 + ...)), F_j(X) the X-part of Y^j
    std::vector<CycPadic> H(D + 1, CycPadic(R));
    bool started = false;
    for (int j = D; j >= 0; --j) {
        if (started) H = mul_trunc(H, B, D);
        for (int i = 0; i + j <= D; ++i)
            if (!f.at(i, j).exact_zero()) {
                H[i] = H[i] + f.at(i, j).embed(R);
                started = true;
            }
    }
    if (!f.polynomial() && !B[0].exact_zero()) {
        mpq_class v = B[0].valuation().v;
        for (int s = 0; s <= D; ++s) H[s] = H[s].cap(v * (D + 1 - s));
    }
    TorusSub r;
    r.zero = true;
    for (auto& h : H) {
        if (!h.is_zero()) r.zero = false;
        r.verified = min_known(r.verified, h.known_to());
    }
    r.H = std::move(H);
    return r;
}

std::string Translate::str() const {
    std::ostringstream os;
    os << "N=" << (N.exact() ? N.value().get_str() : N.str());
    os << " xi=" << (m == 0 ? std::string("1") : "zeta_" + ppow(N.p(), m).get_str() + "^" + std::to_string(a));
    os << (swap ? " (X+1 = xi (Y+1)^N)" : " (Y+1 = xi (X+1)^N)");
    os << " verified to " << verified.str();
    return os.str();
}

DetectResult detect_translate(const PSeries2& f0, int m_max) {
    DetectResult out;
    long p = f0.p();
    int D = f0.D(), M = f0.M();
    for (int sw = 0; sw < 2; ++sw) {
        PSeries2 f = sw ? f0.swapped() : f0;
        for (int m = 0; m <= m_max; ++m) {
            long q = ppow(p, m).get_si();
            for (long a = 0; a < q; ++a) {
                if (m > 0 && a % p == 0) continue;
                const CycRing* R = CycRing::get(p, std::max(m, f.ring()->m));
                CycPadic one(R, PadicInt::exact(p, 1));
                CycPadic xi = CycPadic::zeta_pow(CycRing::get(p, m), a).embed(R);
                CycPadic t = xi - one;
                // f, f_X, f_Y at (0, xi - 1)
                CycPadic c0(R), fx(R), fy(R), tp = one;
                for (int j = 0; j <= D; ++j) {
                    if (j) {
                        if (!f.at(0, j).exact_zero())
                            fy = fy + CycPadic(R, PadicInt::exact(p, j)) * f.at(0, j).embed(R) * tp;
                        tp = tp * t;
                    }
                    if (!f.at(0, j).exact_zero()) c0 = c0 + f.at(0, j).embed(R) * tp;
                    if (j < D && !f.at(1, j).exact_zero()) fx = fx + f.at(1, j).embed(R) * tp;
                }
                if (!f.polynomial() && !t.exact_zero()) {
                    mpq_class v = t.valuation().v;
                    c0 = c0.cap(v * (D + 1));
                    fx = fx.cap(v * D);
                    fy = fy.cap(v * D);
                }
                if (!c0.is_zero()) continue;
                ++out.xi_tried;
                std::vector<PadicInt> Ns;
                CycPadic den = xi * fy, num = -fx;
                if (den.is_zero()) {
                    if (!num.is_zero()) continue;
                    out.notes.push_back("degenerate derivative at m=" + std::to_string(m) + " a=" + std::to_string(a) +
                                        "; small integer search");
                    for (long n = -2 * D; n <= 2 * D; ++n) Ns.push_back(PadicInt::exact(p, n));
                } else {
                    auto Nq = num.divide(den, M);
                    if (!Nq) continue;
                    auto Nz = Nq->as_zp();
                    if (!Nz) continue;
                    mpz_class sv = Nz->signed_value();
                    if (Nz->prec() >= 8 && abs(sv) < 1000000) Ns.push_back(PadicInt(p, sv));
                    Ns.push_back(*Nz);
                }
                for (auto& N : Ns) {
                    TorusSub ts = torus_substitute(f, N, m, a);
                    if (!ts.zero) continue;
                    Translate T;
                    T.N = N;
                    T.m = m;
                    T.a = a;
                    T.swap = sw;
                    T.verified = ts.verified;
                    out.hit = T;
                    return out;
                }
            }
        }
    }
    return out;
}

const char* shape_name(Shape s) {
    switch (s) {
        case Shape::Diagonal: return "DIAGONAL";
        case Shape::TorusTranslate: return "TORUS_TRANSLATE";
        default: return "NO_TRANSLATE_UP_TO_BOUNDS";
    }
}

Classification classify(const PSeries2& f, int m_max, int point_budget) {
    if (!f.at(0, 0).is_zero()) throw std::invalid_argument("series does not vanish at the origin");
    Classification C;
    long p = f.p();
    TorusSub diag = torus_substitute(f, PadicInt::exact(p, 1), 0, 0);
    C.diagonal_verified = diag.verified;
    if (diag.zero) {
        C.shape = Shape::Diagonal;
        return C;
    }
    DetectResult d = detect_translate(f, m_max);
    C.notes = d.notes;
    C.notes.push_back(std::to_string(d.xi_tried) + " roots of unity passed the constant-term test");
    if (d.hit) {
        C.shape = Shape::TorusTranslate;
        C.translate = d.hit;
        return C;
    }
    C.shape = Shape::NoTranslate;
    long q = ppow(p, m_max).get_si();
    long total = q * q - 1;
    if (point_budget > 0 && total > 0) {
        long step = std::max(1L, total / point_budget);
        for (long t = 1; t <= total && C.points_sampled < point_budget; t += step) {
            ClassicalPoint pt{0, m_max, t / q, m_max, t % q};
            PVal v = eval_special(f, pt);
            ++C.points_sampled;
            if (v.kind != PVal::Finite) continue;
            if (!C.empirical_min || v.v < C.empirical_min->v) C.empirical_min = v;
        }
    }
    return C;
}

nlohmann::json Classification::json() const {
    nlohmann::json j;
    j["shape"] = shape_name(shape);
    j["diagonal_verified_to"] = diagonal_verified.str();
    if (translate) {
        j["translate"] = {{"N", translate->N.signed_value().get_str()},
                          {"N_precision", translate->N.exact() ? std::string("exact") : std::to_string(translate->N.prec())},
                          {"xi_m", translate->m},
                          {"xi_a", translate->a},
                          {"swap", translate->swap},
                          {"verified_to", translate->verified.str()},
                          {"text", translate->str()}};
    }
    if (empirical_min) j["empirical_min_valuation"] = empirical_min->str();
    j["points_sampled"] = points_sampled;
    j["notes"] = notes;
    return j;
}

}  // namespace bianchi
