#include "bianchi/iq_ring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bianchi {

namespace {

const FieldCtx kFields[] = {
    {-1, false, -1, 0},
    {-2, false, -2, 0},
    {-3, true, -1, 1},
    {-7, true, -2, 1},
    {-11, true, -3, 1},
};

// nearest integer to num/den (den > 0), ties toward -infinity
mpz_class round_half_down(const mpz_class& num, const mpz_class& den) {
    mpz_class t = 2 * num + den, d2 = 2 * den, q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), t.get_mpz_t(), d2.get_mpz_t());
    if (r == 0) q -= 1;
    return q;
}

long lmod(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

const FieldCtx& FieldCtx::get(long d) {
    for (const auto& f : kFields)
        if (f.d == d) return f;
    throw std::invalid_argument("unsupported field d = " + std::to_string(d));
}

bool FieldCtx::supported(long d) {
    for (const auto& f : kFields)
        if (f.d == d) return true;
    return false;
}

std::vector<std::pair<long, long>> FieldCtx::units() const {
    if (d == -1) return {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    if (d == -3) return {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {-1, 1}, {1, -1}};
    return {{1, 0}, {-1, 0}};
}

IQInt::IQInt() : a_(0), b_(0), f_(&FieldCtx::get(-2)) {}
IQInt::IQInt(long a, long b, long d) : a_(a), b_(b), f_(&FieldCtx::get(d)) {}
IQInt::IQInt(mpz_class a, mpz_class b, const FieldCtx* f) : a_(std::move(a)), b_(std::move(b)), f_(f) {}

IQInt IQInt::operator+(const IQInt& o) const { return IQInt(a_ + o.a_, b_ + o.b_, f_); }
IQInt IQInt::operator-(const IQInt& o) const { return IQInt(a_ - o.a_, b_ - o.b_, f_); }
IQInt IQInt::operator-() const { return IQInt(-a_, -b_, f_); }

IQInt IQInt::operator*(const IQInt& o) const {
    mpz_class bb = b_ * o.b_;
    return IQInt(a_ * o.a_ + bb * f_->c0, a_ * o.b_ + b_ * o.a_ + bb * f_->c1, f_);
}

bool IQInt::operator<(const IQInt& o) const {
    if (a_ != o.a_) return a_ < o.a_;
    return b_ < o.b_;
}

IQInt IQInt::conj() const {
    if (f_->half) return IQInt(a_ + b_, -b_, f_);
    return IQInt(a_, -b_, f_);
}

mpz_class IQInt::norm() const {
    if (f_->half) return a_ * a_ + a_ * b_ + b_ * b_ * ((1 - f_->d) / 4);
    return a_ * a_ - f_->d * b_ * b_;
}

mpz_class IQInt::trace() const {
    if (f_->half) return 2 * a_ + b_;
    return 2 * a_;
}

bool IQInt::divisible_by(const IQInt& b) const {
    if (b.is_zero()) return is_zero();
    IQInt t = *this * b.conj();
    mpz_class n = b.norm();
    return mpz_divisible_p(t.a_.get_mpz_t(), n.get_mpz_t()) && mpz_divisible_p(t.b_.get_mpz_t(), n.get_mpz_t());
}

IQInt IQInt::div_exact(const IQInt& b) const {
    if (b.is_zero()) throw std::domain_error("division by zero");
    IQInt t = *this * b.conj();
    mpz_class n = b.norm();
    if (!mpz_divisible_p(t.a_.get_mpz_t(), n.get_mpz_t()) || !mpz_divisible_p(t.b_.get_mpz_t(), n.get_mpz_t()))
        throw std::domain_error("inexact division " + str() + " / " + b.str());
    return IQInt(t.a_ / n, t.b_ / n, f_);
}

IQInt IQInt::canonical() const {
    IQInt best = *this;
    for (auto [ua, ub] : f_->units()) {
        IQInt c = *this * IQInt(mpz_class(ua), mpz_class(ub), f_);
        if (best < c) best = c;
    }
    return best;
}

std::string IQInt::str() const {
    std::ostringstream os;
    os << a_.get_str();
    if (b_ >= 0) os << '+';
    os << b_.get_str() << "*w";
    return os.str();
}

// accepts "a+b*w", "a-b*w", "a", "b*w", "w", "-w", "a+w", whitespace ignored
IQInt IQInt::parse(const std::string& s0, long d) {
    std::string s;
    for (char ch : s0)
        if (!isspace((unsigned char)ch)) s += ch;
    if (s.empty()) throw std::invalid_argument("empty element");
    mpz_class a = 0, b = 0;
    size_t i = 0;
    bool any = false;
    while (i < s.size()) {
        int sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            if (s[i] == '-') sign = -1;
            ++i;
        }
        size_t j = i;
        while (j < s.size() && isdigit((unsigned char)s[j])) ++j;
        mpz_class coef = 1;
        bool has_num = j > i;
        if (has_num) coef = mpz_class(s.substr(i, j - i));
        i = j;
        bool isw = false;
        if (i < s.size() && s[i] == '*') ++i;
        if (i < s.size() && (s[i] == 'w' || s[i] == 't')) {
            isw = true;
            ++i;
        } else if (!has_num) {
            throw std::invalid_argument("cannot parse element '" + s0 + "'");
        }
        if (isw) b += sign * coef; else a += sign * coef;
        any = true;
    }
    if (!any) throw std::invalid_argument("cannot parse element '" + s0 + "'");
    return IQInt(a, b, &FieldCtx::get(d));
}

std::pair<IQInt, IQInt> euclid_divmod(const IQInt& a, const IQInt& b) {
    if (b.is_zero()) throw std::domain_error("euclid_divmod: division by zero");
    const FieldCtx* f = &a.field();
    mpz_class n = b.norm();
    IQInt t = a * b.conj();
    IQInt q(round_half_down(t.a(), n), round_half_down(t.b(), n), f);
    IQInt r = a - q * b;
    if (r.norm() >= n) {
        // only reachable for d = -7, -11
        IQInt best_q = q, best_r = r;
        for (long da = -1; da <= 1; ++da)
            for (long db = -1; db <= 1; ++db) {
                IQInt qq = q + IQInt(mpz_class(da), mpz_class(db), f);
                IQInt rr = a - qq * b;
                if (rr.norm() < best_r.norm()) best_q = qq, best_r = rr;
            }
        q = best_q;
        r = best_r;
        if (r.norm() >= n) throw std::logic_error("field is not norm-Euclidean here");
    }
    return {q, r};
}

IQInt gcd(IQInt a, IQInt b) {
    while (!b.is_zero()) {
        IQInt r = euclid_divmod(a, b).second;
        a = b;
        b = r;
    }
    return a;
}

std::array<IQInt, 3> xgcd(const IQInt& a, const IQInt& b) {
    const FieldCtx* f = &a.field();
    IQInt zero(0, 0, f->d), one(1, 0, f->d);
    IQInt r0 = a, r1 = b, x0 = one, x1 = zero, y0 = zero, y1 = one;
    while (!r1.is_zero()) {
        auto [q, r] = euclid_divmod(r0, r1);
        r0 = r1;
        r1 = r;
        IQInt x2 = x0 - q * x1, y2 = y0 - q * y1;
        x0 = x1, x1 = x2, y0 = y1, y1 = y2;
    }
    return {r0, x0, y0};
}

Mat2 Mat2::operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

IQInt Mat2::det() const { return a * d - b * c; }

Mat2 Mat2::inverse_sl2() const {
    if (det() != IQInt(1, 0, a.d())) throw std::domain_error("inverse_sl2: determinant is not 1");
    return {d, -b, -c, a};
}

std::string Mat2::str() const {
    return "(" + a.str() + "," + b.str() + ";" + c.str() + "," + d.str() + ")";
}

Mat2 mat2(long d, std::array<std::pair<long, long>, 4> e) {
    return {IQInt(e[0].first, e[0].second, d), IQInt(e[1].first, e[1].second, d),
            IQInt(e[2].first, e[2].second, d), IQInt(e[3].first, e[3].second, d)};
}

namespace {

std::vector<std::pair<long, int>> factor_integer(mpz_class n) {
    std::vector<std::pair<long, int>> out;
    if (n < 0) n = -n;
    for (long p = 2; mpz_class(p) * p <= n; ++p) {
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            int e = 0;
            while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
                n /= p;
                ++e;
            }
            out.push_back({p, e});
        }
    }
    if (n > 1) {
        if (!n.fits_slong_p()) throw std::overflow_error("norm too large to factor");
        out.push_back({n.get_si(), 1});
    }
    return out;
}

bool prime_order(const std::pair<IQInt, int>& x, const std::pair<IQInt, int>& y) {
    mpz_class nx = x.first.norm(), ny = y.first.norm();
    if (nx != ny) return nx < ny;
    return y.first < x.first;  // larger generator first, so 1+w precedes 1-w
}

}  // namespace

std::vector<IQInt> primes_over(long p, long d) {
    const FieldCtx& f = FieldCtx::get(d);
    std::vector<IQInt> out;
    // look for an element of norm p
    for (long b = 0; (long double)(-d) * b * b <= 4.0L * p; ++b) {
        if (!f.half) {
            long t = p + d * b * b;  // a^2 = p - |d| b^2
            if (t < 0) break;
            long a = (long)std::llround(std::sqrt((long double)t));
            for (long aa = std::max(0L, a - 1); aa <= a + 1; ++aa)
                if (aa * aa == t) {
                    IQInt x(aa, b, d);
                    IQInt xc = x.conj().canonical();
                    IQInt xx = x.canonical();
                    out.push_back(xx);
                    if (xc != xx) out.push_back(xc);
                    std::sort(out.begin(), out.end(), [](const IQInt& u, const IQInt& v) { return v < u; });
                    return out;
                }
        } else {
            long t = 4 * p + d * b * b;  // (2a+b)^2 = 4p - |d| b^2
            if (t < 0) break;
            long s = (long)std::llround(std::sqrt((long double)t));
            for (long ss = std::max(0L, s - 1); ss <= s + 1; ++ss)
                if (ss * ss == t && ((ss - b) % 2 == 0)) {
                    IQInt x((ss - b) / 2, b, d);
                    IQInt xc = x.conj().canonical();
                    IQInt xx = x.canonical();
                    out.push_back(xx);
                    if (xc != xx) out.push_back(xc);
                    std::sort(out.begin(), out.end(), [](const IQInt& u, const IQInt& v) { return v < u; });
                    return out;
                }
        }
    }
    out.push_back(IQInt(p, 0, d));  // inert
    return out;
}

std::vector<std::pair<IQInt, int>> factor_ideal(const IQInt& n) {
    if (n.is_zero()) throw std::invalid_argument("factor_ideal: zero ideal");
    std::vector<std::pair<IQInt, int>> out;
    IQInt m = n;
    for (auto [p, e] : factor_integer(n.norm())) {
        (void)e;
        for (const IQInt& pr : primes_over(p, n.d())) {
            int k = 0;
            while (m.divisible_by(pr)) {
                m = m.div_exact(pr);
                ++k;
            }
            if (k > 0) out.push_back({pr, k});
        }
    }
    if (!m.is_unit()) throw std::logic_error("factor_ideal: incomplete factorization of " + n.str());
    std::sort(out.begin(), out.end(), prime_order);
    return out;
}

std::vector<IQInt> primes_up_to(long bound, long d) {
    std::vector<std::pair<IQInt, int>> all;
    std::vector<char> sieve(bound + 1, 1);
    for (long p = 2; p <= bound; ++p) {
        if (!sieve[p]) continue;
        for (long q = p * p; q <= bound; q += p) sieve[q] = 0;
        for (const IQInt& pr : primes_over(p, d))
            if (pr.norm() <= bound) all.push_back({pr, 1});
    }
    std::sort(all.begin(), all.end(), prime_order);
    std::vector<IQInt> out;
    for (auto& pe : all) out.push_back(pe.first);
    return out;
}

bool is_prime_element(const IQInt& x) {
    if (x.is_zero() || x.is_unit()) return false;
    auto f = factor_ideal(x);
    return f.size() == 1 && f[0].second == 1;
}

Ideal::Ideal(const IQInt& g) : gen(g.canonical()), factors(factor_ideal(g)) {}

bool Ideal::operator<(const Ideal& o) const {
    mpz_class a = norm(), b = o.norm();
    if (a != b) return a < b;
    return o.gen < gen;
}

int Ideal::valuation(const IQInt& prime) const {
    IQInt p = prime.canonical();
    for (auto& [q, e] : factors)
        if (q == p) return e;
    return 0;
}

std::vector<Ideal> Ideal::divisors() const {
    std::vector<IQInt> gens{IQInt(1, 0, gen.d())};
    for (auto& [p, e] : factors) {
        std::vector<IQInt> next;
        for (auto& g : gens) {
            IQInt t = g;
            for (int k = 0; k <= e; ++k) {
                next.push_back(t);
                t = t * p;
            }
        }
        gens = std::move(next);
    }
    std::vector<Ideal> out;
    for (auto& g : gens) out.emplace_back(g);
    std::sort(out.begin(), out.end());
    return out;
}

Ideal Ideal::lcm_with(const Ideal& o) const {
    Ideal g = gcd_with(o);
    return Ideal((gen * o.gen).div_exact(g.gen));
}

ResidueRing::ResidueRing(const IQInt& m) : m_(m), f_(&m.field()) {
    if (m.is_zero()) throw std::invalid_argument("ResidueRing: zero modulus");
    if (!m.norm().fits_slong_p() || m.norm() > 2000000000L) throw std::overflow_error("modulus too large");
    long a = m.a_long(), b = m.b_long();
    // rows m*1 and m*w in coordinates
    long r[2][2] = {{a, b}, {b * f_->c0, a + b * f_->c1}};
    while (r[1][0] != 0) {
        long q = r[0][0] / r[1][0];
        r[0][0] -= q * r[1][0];
        r[0][1] -= q * r[1][1];
        std::swap(r[0], r[1]);
    }
    if (r[0][0] < 0) r[0][0] = -r[0][0], r[0][1] = -r[0][1];
    if (r[1][1] < 0) r[1][1] = -r[1][1];
    A_ = r[0][0];
    C_ = r[1][1];
    B_ = lmod(r[0][1], C_);
    n_ = A_ * C_;
    if (n_ != m.norm().get_si()) throw std::logic_error("ResidueRing: bad Hermite basis");
    unit_.assign(n_, 0);
    auto fac = factor_ideal(m);
    for (long i = 0; i < n_; ++i) {
        IQInt x = element(i);
        bool u = true;
        for (auto& [p, e] : fac)
            if (x.divisible_by(p)) u = false;
        unit_[i] = u;
        nunits_ += u;
    }
}

long ResidueRing::index(long x0, long x1) const {
    long q = x0 >= 0 ? x0 / A_ : -((-x0 + A_ - 1) / A_);
    x0 -= q * A_;
    x1 = lmod(x1 - lmod(q, C_) * B_, C_);
    return x0 * C_ + x1;
}

long ResidueRing::index(const IQInt& x) const {
    mpz_class A = A_, C = C_, B = B_;
    mpz_class q, x0;
    mpz_fdiv_qr(q.get_mpz_t(), x0.get_mpz_t(), x.a().get_mpz_t(), A.get_mpz_t());
    mpz_class x1 = x.b() - q * B;
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), x1.get_mpz_t(), C.get_mpz_t());
    return x0.get_si() * C_ + r.get_si();
}

IQInt ResidueRing::element(long i) const { return IQInt(mpz_class(i / C_), mpz_class(i % C_), f_); }

long ResidueRing::add(long i, long j) const {
    return index(i / C_ + j / C_, i % C_ + j % C_);
}

long ResidueRing::neg(long i) const { return index(-(i / C_), -(i % C_)); }

long ResidueRing::mul(long i, long j) const {
    __int128 a = i / C_, b = i % C_, c = j / C_, d = j % C_;
    __int128 bd = b * d;
    __int128 x0 = a * c + bd * f_->c0, x1 = a * d + b * c + bd * f_->c1;
    // reduce x1 first modulo C, x0 modulo A*C via the lattice
    long N = n_;
    long y0 = (long)(x0 % N), y1 = (long)(x1 % N);
    return index(y0, y1);
}

long UnitGroup::order() const {
    long o = 1;
    for (int k : orders) o *= k;
    return o;
}

long UnitGroup::exponent() const {
    long e = 1;
    for (int k : orders) e = std::lcm(e, (long)k);
    return e;
}

UnitGroup unit_group(const ResidueRing& R) {
    const long n = R.size();
    std::vector<long> units;
    for (long i = 0; i < n; ++i)
        if (R.is_unit(i)) units.push_back(i);
    const long G = (long)units.size();
    const long one = R.one();
    auto power = [&](long g, long k) {
        long r = one;
        for (long i = 0; i < k; ++i) r = R.mul(r, g);
        return r;
    };
    auto order_of = [&](long g) {
        long r = g, k = 1;
        while (r != one) r = R.mul(r, g), ++k;
        return k;
    };
    // Sylow decomposition, then a basis of each p-part by the max-order method
    std::vector<std::pair<long, int>> pf;
    {
        long m = G;
        for (long p = 2; p * p <= m; ++p)
            if (m % p == 0) {
                int e = 0;
                while (m % p == 0) m /= p, ++e;
                pf.push_back({p, e});
            }
        if (m > 1) pf.push_back({m, 1});
    }
    std::vector<std::vector<std::pair<long, int>>> sylow_gens;  // (element, order)
    for (auto [p, e] : pf) {
        long pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        long cof = G / pe;
        std::vector<char> inP(n, 0), inH(n, 0);
        std::vector<long> P;
        for (long u : units) {
            long v = power(u, cof);
            if (!inP[v]) inP[v] = 1, P.push_back(v);
        }
        std::sort(P.begin(), P.end());
        std::vector<long> H{one};
        inH[one] = 1;
        std::vector<std::pair<long, int>> gens;
        while ((long)H.size() < (long)P.size()) {
            long best = -1, bestk = 0;
            for (long g : P) {
                long k = 1, r = g;
                while (!inH[r]) r = power(r, p), k *= p;
                if (k > bestk) bestk = k, best = g;
            }
            long h = power(best, bestk);
            long fix = -1;
            for (long x : H)
                if (power(x, bestk) == h) { fix = x; break; }
            if (fix < 0) throw std::logic_error("unit_group: basis construction failed");
            // g' = g * fix^{-1}
            long finv = power(fix, order_of(fix) - 1);
            long g2 = R.mul(best, finv);
            gens.push_back({g2, (int)bestk});
            std::vector<long> H2;
            long gp = one;
            for (long k = 0; k < bestk; ++k) {
                for (long x : H) {
                    long y = R.mul(x, gp);
                    if (!inH[y]) inH[y] = 2;
                    H2.push_back(y);
                }
                gp = R.mul(gp, g2);
            }
            for (long y : H2) inH[y] = 1;
            H = std::move(H2);
        }
        sylow_gens.push_back(gens);
    }
    // combine into invariant factors n_1 >= n_2 >= ...
    size_t rank = 0;
    for (auto& s : sylow_gens) rank = std::max(rank, s.size());
    UnitGroup out;
    for (size_t i = 0; i < rank; ++i) {
        long g = one;
        long ord = 1;
        for (auto& s : sylow_gens)
            if (i < s.size()) g = R.mul(g, s[i].first), ord *= s[i].second;
        out.gens.push_back(g);
        out.orders.push_back((int)ord);
    }
    out.dlog.assign(n, {});
    // enumerate exponent vectors
    std::vector<int> e(out.gens.size(), 0);
    long x = one;
    std::vector<long> partial(out.gens.size() + 1, one);
    long total = out.order();
    for (long t = 0; t < total; ++t) {
        long v = one;
        for (size_t i = 0; i < e.size(); ++i) v = R.mul(v, power(out.gens[i], e[i]));
        if (!out.dlog[v].empty()) throw std::logic_error("unit_group: generators not independent");
        out.dlog[v] = e;
        for (size_t i = 0; i < e.size(); ++i) {
            if (++e[i] < out.orders[i]) break;
            e[i] = 0;
        }
    }
    (void)x;
    (void)partial;
    if (total != G) throw std::logic_error("unit_group: order mismatch");
    return out;
}

Modulus::Modulus(const Ideal& N) : N_(N), R_(N.gen) {
    for (int i = 0; i < (int)N.factors.size(); ++i) {
        IQInt q(1, 0, N.gen.d());
        for (int k = 0; k < N.factors[i].second; ++k) q = q * N.factors[i].first;
        local_.emplace_back(q);
        lunits_.push_back(unit_group(local_.back()));
        for (int o : lunits_.back().orders) {
            gen_order_.push_back(o);
            gen_local_.push_back(i);
            exponent_ = std::lcm(exponent_, (long)o);
        }
    }
}

long Modulus::unit_count() const {
    long c = 1;
    for (auto& u : lunits_) c *= u.order();
    return c;
}

std::vector<long> Modulus::to_local(long i) const {
    IQInt x = R_.element(i);
    std::vector<long> out;
    for (auto& L : local_) out.push_back(L.index(x));
    return out;
}

std::vector<int> Modulus::dlog(const std::vector<long>& loc) const {
    std::vector<int> out;
    for (int i = 0; i < nlocal(); ++i) {
        if (!local_[i].is_unit(loc[i])) throw std::domain_error("dlog of a non-unit");
        const auto& d = lunits_[i].dlog[loc[i]];
        out.insert(out.end(), d.begin(), d.end());
    }
    return out;
}

IQInt Modulus::crt_lift(const std::vector<long>& loc) const {
    long dd = N_.gen.d();
    IQInt x(0, 0, dd);
    for (int i = 0; i < nlocal(); ++i) {
        const IQInt& q = local_[i].modulus();
        IQInt Mi = N_.gen.div_exact(q);
        auto g = xgcd(Mi, q);
        IQInt ei = g[1] * Mi * IQInt(1, 0, dd).div_exact(g[0]);
        x = x + local_[i].element(loc[i]) * ei;
    }
    return R_.element(R_.index(x));
}

IQInt Modulus::gen_element(int g) const {
    int i = gen_local_[g];
    int g0 = g;
    while (g0 > 0 && gen_local_[g0 - 1] == i) --g0;
    std::vector<long> loc;
    for (int j = 0; j < nlocal(); ++j) loc.push_back(local_[j].one());
    loc[i] = lunits_[i].gens[g - g0];
    return crt_lift(loc);
}

std::vector<DirichletChar> Modulus::characters() const {
    std::vector<DirichletChar> out;
    std::vector<int> e(gen_order_.size(), 0);
    long total = 1;
    for (int o : gen_order_) total *= o;
    for (long t = 0; t < total; ++t) {
        out.emplace_back(this, e);
        for (size_t i = 0; i < e.size(); ++i) {
            if (++e[i] < gen_order_[i]) break;
            e[i] = 0;
        }
    }
    return out;
}

DirichletChar::DirichletChar(const Modulus* M, std::vector<int> exps) : M_(M), e_(std::move(exps)) {
    if ((int)e_.size() != M->ngens()) throw std::invalid_argument("character exponent vector has wrong length");
    long o = 1;
    for (int g = 0; g < M->ngens(); ++g) {
        int n = M->gen_order(g);
        e_[g] = (int)lmod(e_[g], n);
        o = std::lcm(o, (long)(n / std::gcd(e_[g], n)));
    }
    order_ = (int)o;
}

int DirichletChar::value_local(int i, long r) const {
    if (!M_->local_ring(i).is_unit(r)) return -1;
    const auto& d = M_->local_units(i).dlog[r];
    if (d.empty()) return 0;  // trivial unit group
    long M = M_->exponent();
    long acc = 0;
    int g0 = 0;
    while (M_->gen_local(g0) != i) ++g0;
    for (size_t j = 0; j < d.size(); ++j) {
        int o = M_->gen_order(g0 + (int)j);
        acc += (long)e_[g0 + j] * d[j] * (M / o);
    }
    acc %= M;
    return (int)(acc / (M / order_));
}

int DirichletChar::value(const std::vector<long>& loc) const {
    long acc = 0;
    for (int i = 0; i < M_->nlocal(); ++i) {
        int v = value_local(i, loc[i]);
        if (v < 0) return -1;
        acc += v;
    }
    return (int)(acc % order_);
}

int DirichletChar::value_global(long r) const { return value(M_->to_local(r)); }
int DirichletChar::value_at(const IQInt& x) const { return value_global(M_->ring().index(x)); }

int DirichletChar::local_order(int i) const {
    long o = 1;
    for (int g = 0; g < M_->ngens(); ++g)
        if (M_->gen_local(g) == i) {
            int n = M_->gen_order(g);
            o = std::lcm(o, (long)(n / std::gcd(e_[g], n)));
        }
    return (int)o;
}

int DirichletChar::sign() const {
    int v = value_at(IQInt(-1, 0, M_->ideal().gen.d()));
    if (v == 0) return 1;
    if (2 * v == order_) return -1;
    throw std::logic_error("eps(-1) is not +-1");
}

int DirichletChar::conductor_exp(int i) const {
    const ResidueRing& L = M_->local_ring(i);
    const IQInt& p = M_->local_prime(i);
    int e = M_->local_exp(i);
    for (int f = 0; f <= e; ++f) {
        IQInt pf(1, 0, p.d());
        for (int k = 0; k < f; ++k) pf = pf * p;
        bool trivial = true;
        for (long r = 0; r < L.size() && trivial; ++r) {
            if (!L.is_unit(r)) continue;
            IQInt x = L.element(r) - IQInt(1, 0, p.d());
            if (x.divisible_by(pf) && value_local(i, r) != 0) trivial = false;
        }
        if (trivial) return f;
    }
    return e;
}

Ideal DirichletChar::conductor() const {
    IQInt g(1, 0, M_->ideal().gen.d());
    for (int i = 0; i < M_->nlocal(); ++i) {
        int f = conductor_exp(i);
        for (int k = 0; k < f; ++k) g = g * M_->local_prime(i);
    }
    return Ideal(g);
}

DirichletChar DirichletChar::pow(int k) const {
    std::vector<int> e = e_;
    for (auto& x : e) x *= k;
    return DirichletChar(M_, e);
}

std::vector<DirichletChar> DirichletChar::galois_orbit() const {
    std::vector<DirichletChar> out;
    for (int k = 1; k <= order_; ++k)
        if (std::gcd(k, order_) == 1) {
            DirichletChar c = pow(k);
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::string DirichletChar::str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < e_.size(); ++i) os << (i ? "," : "") << e_[i];
    os << "]@" << M_->ideal().gen.str();
    return os.str();
}

DirichletChar parse_char(const std::string& s, const Modulus* M) {
    auto at = s.find('@');
    std::string body = s.substr(0, at);
    std::vector<int> e;
    std::string tok;
    for (char ch : body) {
        if (ch == '[' || ch == ']' || isspace((unsigned char)ch)) continue;
        if (ch == ',') {
            if (!tok.empty()) e.push_back(std::stoi(tok));
            tok.clear();
        } else {
            tok += ch;
        }
    }
    if (!tok.empty()) e.push_back(std::stoi(tok));
    if (at != std::string::npos) {
        Ideal N(IQInt::parse(s.substr(at + 1), M->ideal().gen.d()));
        if (!(N == M->ideal())) throw std::invalid_argument("character modulus does not match level");
    }
    if (e.empty() && M->ngens() > 0) e.assign(M->ngens(), 0);
    return DirichletChar(M, e);
}

ProjLine::ProjLine(const Modulus& M) : M_(&M) {
    int r = M.nlocal();
    lreps_.resize(r);
    lcanon_.resize(r);
    lunit_.resize(r);
    for (int i = 0; i < r; ++i) {
        const ResidueRing& L = M.local_ring(i);
        long m = L.size();
        lcanon_[i].assign(m * m, -1);
        lunit_[i].assign(m * m, -1);
        std::vector<long> units;
        for (long u = 0; u < m; ++u)
            if (L.is_unit(u)) units.push_back(u);
        for (long c = 0; c < m; ++c)
            for (long d = 0; d < m; ++d) {
                if (lcanon_[i][c * m + d] >= 0) continue;
                if (!L.is_unit(c) && !L.is_unit(d)) continue;
                int k = (int)lreps_[i].size();
                lreps_[i].push_back({c, d});
                for (long u : units) {
                    long uc = L.mul(u, c), ud = L.mul(u, d);
                    lcanon_[i][uc * m + ud] = k;
                    lunit_[i][uc * m + ud] = (int32_t)u;
                }
            }
    }
    radix_.assign(r, 1);
    n_ = 1;
    for (int i = r - 1; i >= 0; --i) {
        radix_[i] = n_;
        n_ *= (long)lreps_[i].size();
    }
}

ProjLine::RedMat ProjLine::reduce(const Mat2& g) const {
    RedMat out;
    for (int i = 0; i < M_->nlocal(); ++i) {
        const ResidueRing& L = M_->local_ring(i);
        out.loc.push_back({{L.index(g.a), L.index(g.b), L.index(g.c), L.index(g.d)}});
    }
    return out;
}

long ProjLine::act(long x, const RedMat& g, long* units) const {
    long idx = 0;
    for (int i = 0; i < M_->nlocal(); ++i) {
        const ResidueRing& L = M_->local_ring(i);
        long li = (x / radix_[i]) % (long)lreps_[i].size();
        auto [c, d] = lreps_[i][li];
        const auto& e = g.loc[i].e;
        long nc = L.add(L.mul(c, e[0]), L.mul(d, e[2]));
        long nd = L.add(L.mul(c, e[1]), L.mul(d, e[3]));
        long key = nc * L.size() + nd;
        int k = lcanon_[i][key];
        if (k < 0) return -1;
        if (units) units[i] = lunit_[i][key];
        idx += k * radix_[i];
    }
    return idx;
}

long ProjLine::normalize(const long* c, const long* d, long* units) const {
    long idx = 0;
    for (int i = 0; i < M_->nlocal(); ++i) {
        long key = c[i] * M_->local_ring(i).size() + d[i];
        int k = lcanon_[i][key];
        if (k < 0) return -1;
        if (units) units[i] = lunit_[i][key];
        idx += k * radix_[i];
    }
    return idx;
}

long ProjLine::index_of(const IQInt& c, const IQInt& d, long* units) const {
    std::vector<long> cc, dd;
    for (int i = 0; i < M_->nlocal(); ++i) {
        cc.push_back(M_->local_ring(i).index(c));
        dd.push_back(M_->local_ring(i).index(d));
    }
    return normalize(cc.data(), dd.data(), units);
}

std::pair<long, long> ProjLine::local_rep(long x, int i) const {
    return lreps_[i][(x / radix_[i]) % (long)lreps_[i].size()];
}

std::pair<IQInt, IQInt> ProjLine::rep(long x) const {
    // CRT lift of the local representatives
    const Ideal& N = M_->ideal();
    long dd = N.gen.d();
    IQInt c(0, 0, dd), d(0, 0, dd);
    for (int i = 0; i < M_->nlocal(); ++i) {
        const IQInt& q = M_->local_ring(i).modulus();
        IQInt Mi = N.gen.div_exact(q);
        auto g = xgcd(Mi, q);  // g = x*Mi + y*q, g a unit
        IQInt ginv = IQInt(1, 0, dd).div_exact(g[0]);
        IQInt ei = g[1] * Mi * ginv;
        auto [lc, ld] = local_rep(x, i);
        c = c + M_->local_ring(i).element(lc) * ei;
        d = d + M_->local_ring(i).element(ld) * ei;
    }
    const ResidueRing& R = M_->ring();
    return {R.element(R.index(c)), R.element(R.index(d))};
}

DirichletChar induce(const DirichletChar& chi, const Modulus& M) {
    if (!chi.modulus().ideal().divides(M.ideal())) throw std::invalid_argument("induce: modulus does not divide");
    std::vector<int> e(M.ngens());
    for (int g = 0; g < M.ngens(); ++g) {
        int v = chi.value_at(M.gen_element(g));
        if (v < 0) throw std::logic_error("induce: generator is not a unit");
        long num = (long)v * M.gen_order(g);
        if (num % chi.order()) throw std::logic_error("induce: value order does not divide generator order");
        e[g] = (int)(num / chi.order());
    }
    return DirichletChar(&M, e);
}

std::optional<DirichletChar> restrict_char(const DirichletChar& eps, const Modulus& D) {
    if (!D.ideal().divides(eps.modulus().ideal())) return std::nullopt;
    if (!eps.conductor().divides(D.ideal())) return std::nullopt;
    for (auto& chi : D.characters()) {
        if (chi.order() != eps.order()) continue;
        if (induce(chi, eps.modulus()) == eps) return chi;
    }
    return std::nullopt;
}

long proj_line_size_formula(const Ideal& N) {
    // N(N) * prod (1 + 1/N(p))
    mpz_class num = N.norm(), den = 1;
    for (auto& [p, e] : N.factors) {
        mpz_class np = p.norm();
        num *= (np + 1);
        den *= np;
    }
    return mpz_class(num / den).get_si();
}

}  // namespace bianchi
