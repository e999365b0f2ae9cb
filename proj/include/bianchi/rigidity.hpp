#pragma once

#include <climits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

namespace bianchi {

// p^e, cached
const mpz_class& ppow(long p, int e);
// p-adic valuation of a nonzero integer
int vp_mpz(const mpz_class& x, long p);

// Element of Z_p known modulo p^prec. prec == kExact marks an exact integer
// (kept unreduced); exact values stay exact under ring operations.
class PadicInt {
public:
    static constexpr int kExact = INT_MAX;
    PadicInt() = default;
    PadicInt(long p, const mpz_class& v, int prec = kExact);
    static PadicInt exact(long p, long v) { return PadicInt(p, mpz_class(v)); }

    long p() const { return p_; }
    int prec() const { return prec_; }
    bool exact() const { return prec_ == kExact; }
    const mpz_class& value() const { return v_; }
    mpz_class signed_value() const;  // representative in (-p^prec/2, p^prec/2]
    bool is_zero() const { return v_ == 0; }  // at current precision
    bool exact_zero() const { return exact() && v_ == 0; }
    bool is_unit() const;
    std::optional<int> valuation() const;  // none when zero to precision
    long val_bound() const;                // valuation, or prec when undetermined
    PadicInt with_prec(int m) const;       // lowers precision only
    PadicInt shift_down(int k) const;      // divide by p^k; precision drops by k
    PadicInt inverse(int M) const;         // units only
    std::string str() const;

    friend PadicInt operator+(const PadicInt& a, const PadicInt& b);
    friend PadicInt operator-(const PadicInt& a, const PadicInt& b);
    friend PadicInt operator*(const PadicInt& a, const PadicInt& b);
    PadicInt operator-() const;

private:
    void normalize();
    long p_ = 0;
    mpz_class v_;
    int prec_ = kExact;
};

// A valuation that is exact, a lower bound, or infinite (exact zero).
struct PVal {
    enum Kind { Finite, AtLeast, Infinite } kind = Infinite;
    mpq_class v;
    bool determinate() const { return kind != AtLeast; }
    std::string str() const;
    bool operator==(const PVal& o) const { return kind == o.kind && (kind == Infinite || v == o.v); }
};
PVal operator+(const PVal& a, const PVal& b);

// Z_p[zeta_{p^m}] in the basis 1, l, .., l^{n-1} with l = zeta - 1 and
// n = phi(p^m); m = 0 is Z_p itself.
struct CycRing {
    long p;
    int m;
    int n;
    std::vector<mpz_class> mp;  // l^n = -sum mp[i] l^i (Eisenstein)
    static const CycRing* get(long p, int m);
};

class CycPadic {
public:
    CycPadic() = default;
    explicit CycPadic(const CycRing* R);  // exact zero
    CycPadic(const CycRing* R, const PadicInt& c0);
    static CycPadic lambda(const CycRing* R);
    static CycPadic zeta_pow(const CycRing* R, long k);  // zeta_{p^m}^k

    const CycRing* ring() const { return R_; }
    const PadicInt& operator[](int i) const { return c_[i]; }
    PadicInt& operator[](int i) { return c_[i]; }
    bool is_zero() const;    // at current precision
    bool exact_zero() const;
    bool is_scalar() const;  // higher lambda-coefficients exactly zero
    // valuation normalized by v(p) = 1; exact digit formula on the lambda basis
    PVal valuation() const;
    // same via v_p(Norm) / n (Bareiss determinant of the multiplication matrix)
    PVal norm_valuation() const;
    PadicInt norm() const;
    // lower bound for the valuation of the unknown part (infinite if exact)
    PVal known_to() const;
    CycPadic cap(const mpq_class& T) const;  // forget everything of valuation >= T
    CycPadic with_prec(int M) const;
    CycPadic embed(const CycRing* to) const;
    std::optional<PadicInt> as_zp() const;
    CycPadic div_lambda() const;  // caller ensures divisibility
    CycPadic inverse(int M) const;  // units only
    std::optional<CycPadic> divide(const CycPadic& b, int M) const;
    CycPadic pow(long e) const;
    std::string str() const;

    friend CycPadic operator+(const CycPadic& a, const CycPadic& b);
    friend CycPadic operator-(const CycPadic& a, const CycPadic& b);
    friend CycPadic operator*(const CycPadic& a, const CycPadic& b);
    CycPadic operator-() const;

private:
    const CycRing* R_ = nullptr;
    std::vector<PadicInt> c_;
};

// Truncated power series in X, Y over O = Z_p[zeta_{p^e}]: monomials of total
// degree <= D, coefficients known mod p^M (or exact). polynomial() records that
// every dropped term is zero, in which case nothing is lost to truncation.
class PSeries2 {
public:
    PSeries2() = default;
    PSeries2(const CycRing* O, int D, int M);
    static PSeries2 zp(long p, int D, int M) { return PSeries2(CycRing::get(p, 0), D, M); }

    const CycRing* ring() const { return R_; }
    long p() const { return R_->p; }
    int D() const { return D_; }
    int M() const { return M_; }
    bool polynomial() const { return poly_; }
    void set_polynomial(bool b) { poly_ = b; }
    CycPadic& at(int i, int j) { return c_[idx(i, j)]; }
    const CycPadic& at(int i, int j) const { return c_[idx(i, j)]; }
    void set(int i, int j, long v);
    int degree() const;  // -1 for the zero series
    PSeries2 swapped() const;
    PSeries2 truncated(int D, int M) const;  // D <= D(), M <= M()
    PSeries2 over(const CycRing* O) const;   // extend scalars

    friend PSeries2 operator+(const PSeries2& a, const PSeries2& b);
    friend PSeries2 operator-(const PSeries2& a, const PSeries2& b);
    friend PSeries2 operator*(const PSeries2& a, const PSeries2& b);

    // {"i,j": "c"} with c an integer (Z_p) or a list of lambda-coefficients
    nlohmann::json to_json() const;
    static PSeries2 from_json(const nlohmann::json& j, long p, int D, int M);

    // xi (X+1)^N - (Y+1) with xi = zeta_{p^m}^a, over Z_p[zeta_{p^max(m,e)}]
    static PSeries2 translate(long p, int D, int M, const PadicInt& N, int m, long a, int e = 0);
    static PSeries2 random(const CycRing* O, int D, int M, std::mt19937_64& rng, bool through_origin = true);
    // exact unit polynomial of total degree <= deg with small coefficients
    static PSeries2 random_unit_poly(const CycRing* O, int D, int M, int deg, std::mt19937_64& rng);

private:
    static int idx(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }
    const CycRing* R_ = nullptr;
    int D_ = 0, M_ = 0;
    bool poly_ = true;
    std::vector<CycPadic> c_;
};

// P_{k, zeta, zeta'}: coordinates ((1+p)^k zeta - 1, (1+p)^k zeta' - 1) with
// zeta = zeta_{p^m}^a and zeta' = zeta_{p^m2}^a2
struct ClassicalPoint {
    long k = 0;
    int m = 0;
    long a = 0;
    int m2 = 0;
    long a2 = 0;
    std::string str() const;
};

CycPadic eval_at(const PSeries2& f, const ClassicalPoint& pt);
PVal eval_special(const PSeries2& f, const ClassicalPoint& pt);

// f((1+p)^K (X+1) - 1, (1+p)^K (Y+1) - 1); coefficients of total degree s lose
// precision (D+1-s) v((1+p)^K - 1) unless f is a polynomial
PSeries2 recenter(const PSeries2& f, const PadicInt& K);

struct TorusSub {
    std::vector<CycPadic> H;  // degrees 0..D
    bool zero = false;
    PVal verified;  // every coefficient is known to this valuation
};
// H(X) = f(X, xi (X+1)^N - 1), xi = zeta_{p^m}^a
TorusSub torus_substitute(const PSeries2& f, const PadicInt& N, int m, long a);

struct Translate {
    PadicInt N;
    int m = 0;
    long a = 0;        // xi = zeta_{p^m}^a
    bool swap = false;  // true: X+1 = xi (Y+1)^N
    PVal verified;
    std::string str() const;
};
struct DetectResult {
    std::optional<Translate> hit;
    int xi_tried = 0;   // xi with f(0, xi-1) = 0 to precision
    std::vector<std::string> notes;
};
DetectResult detect_translate(const PSeries2& f, int m_max = 3);

enum class Shape { Diagonal, TorusTranslate, NoTranslate };
const char* shape_name(Shape s);
struct Classification {
    Shape shape = Shape::NoTranslate;
    std::optional<Translate> translate;
    PVal diagonal_verified;
    // empirical minimum of eval_special over sampled torsion points off the origin
    std::optional<PVal> empirical_min;
    int points_sampled = 0;
    std::vector<std::string> notes;
    nlohmann::json json() const;
};
Classification classify(const PSeries2& f, int m_max = 3, int point_budget = 16);

}  // namespace bianchi
