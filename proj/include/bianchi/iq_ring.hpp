#pragma once

#include <gmpxx.h>

#include <array>
#include <optional>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bianchi {

// Q(sqrt d) for the five norm-Euclidean d. The integral basis is 1, w with
// w = sqrt(d) when d = 2,3 mod 4 and w = (1+sqrt(d))/2 when d = 1 mod 4,
// so that w^2 = c0 + c1*w.
struct FieldCtx {
    long d;
    bool half;
    long c0, c1;

    static const FieldCtx& get(long d);
    static bool supported(long d);
    std::vector<std::pair<long, long>> units() const;  // all units as (a, b)
};

class IQInt {
public:
    IQInt();
    IQInt(long a, long b = 0, long d = -2);
    IQInt(mpz_class a, mpz_class b, const FieldCtx* f);

    const FieldCtx& field() const { return *f_; }
    long d() const { return f_->d; }
    const mpz_class& a() const { return a_; }
    const mpz_class& b() const { return b_; }

    IQInt operator+(const IQInt& o) const;
    IQInt operator-(const IQInt& o) const;
    IQInt operator-() const;
    IQInt operator*(const IQInt& o) const;
    IQInt& operator+=(const IQInt& o) { return *this = *this + o; }
    IQInt& operator-=(const IQInt& o) { return *this = *this - o; }
    IQInt& operator*=(const IQInt& o) { return *this = *this * o; }
    bool operator==(const IQInt& o) const { return a_ == o.a_ && b_ == o.b_; }
    bool operator!=(const IQInt& o) const { return !(*this == o); }
    bool operator<(const IQInt& o) const;  // lexicographic on (a, b)

    IQInt conj() const;
    mpz_class norm() const;
    mpz_class trace() const;
    bool is_zero() const { return a_ == 0 && b_ == 0; }
    bool is_unit() const { return norm() == 1; }

    // exact division; throws if b does not divide *this
    IQInt div_exact(const IQInt& b) const;
    bool divisible_by(const IQInt& b) const;

    // lexicographically largest associate
    IQInt canonical() const;

    long a_long() const { return a_.get_si(); }
    long b_long() const { return b_.get_si(); }

    std::string str() const;  // "a+b*w"
    static IQInt parse(const std::string& s, long d = -2);

private:
    mpz_class a_, b_;
    const FieldCtx* f_;
};

// a = q*b + r, N(r) < N(b). Rounds each coordinate of a/b to nearest with ties
// toward -infinity; for d = 1 mod 4 a neighbour search repairs the few cases
// where coordinate rounding is not norm-reducing.
std::pair<IQInt, IQInt> euclid_divmod(const IQInt& a, const IQInt& b);
IQInt gcd(IQInt a, IQInt b);
// returns (g, x, y) with g = x*a + y*b
std::array<IQInt, 3> xgcd(const IQInt& a, const IQInt& b);

struct Mat2 {
    IQInt a, b, c, d;
    Mat2 operator*(const Mat2& o) const;
    IQInt det() const;
    bool operator==(const Mat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
    static Mat2 identity(long dd = -2) { return {IQInt(1, 0, dd), IQInt(0, 0, dd), IQInt(0, 0, dd), IQInt(1, 0, dd)}; }
    Mat2 inverse_sl2() const;  // requires det = 1
    std::string str() const;
};
Mat2 mat2(long d, std::array<std::pair<long, long>, 4> e);

// Principal ideal stored through a canonical generator plus its factorization.
struct Ideal {
    IQInt gen;
    std::vector<std::pair<IQInt, int>> factors;  // canonical prime generators

    Ideal() = default;
    explicit Ideal(const IQInt& g);
    mpz_class norm() const { return gen.norm(); }
    long norm_long() const { return gen.norm().get_si(); }
    bool is_unit() const { return gen.is_unit(); }
    bool divides(const Ideal& o) const { return o.gen.divisible_by(gen); }
    Ideal operator*(const Ideal& o) const { return Ideal(gen * o.gen); }
    bool operator==(const Ideal& o) const { return gen == o.gen; }
    bool operator<(const Ideal& o) const;
    int valuation(const IQInt& prime) const;
    std::vector<Ideal> divisors() const;
    Ideal gcd_with(const Ideal& o) const { return Ideal(bianchi::gcd(gen, o.gen)); }
    Ideal lcm_with(const Ideal& o) const;
    Ideal quotient(const Ideal& o) const { return Ideal(gen.div_exact(o.gen)); }
    std::string str() const { return gen.str(); }
};

std::vector<std::pair<IQInt, int>> factor_ideal(const IQInt& n);
// primes of O lying over the rational prime p, canonical generators
std::vector<IQInt> primes_over(long p, long d = -2);
// all prime ideals of norm <= bound, ordered by norm then generator
std::vector<IQInt> primes_up_to(long bound, long d = -2);
bool is_prime_element(const IQInt& x);

// O/(m) with elements stored as reduced coordinate pairs. The ideal lattice has
// Hermite basis (A, B), (0, C) on the coordinates (x0, x1); the canonical
// representative has 0 <= x0 < A, 0 <= x1 < C and index x0*C + x1.
class ResidueRing {
public:
    ResidueRing() = default;
    explicit ResidueRing(const IQInt& m);

    const IQInt& modulus() const { return m_; }
    const FieldCtx& field() const { return *f_; }
    long size() const { return n_; }
    long index(long x0, long x1) const;
    long index(const IQInt& x) const;
    std::pair<long, long> coords(long i) const { return {i / C_, i % C_}; }
    IQInt element(long i) const;
    long add(long i, long j) const;
    long neg(long i) const;
    long mul(long i, long j) const;
    long one() const { return index(1, 0); }
    bool is_unit(long i) const { return unit_[i]; }
    long unit_count() const { return nunits_; }

private:
    IQInt m_;
    const FieldCtx* f_ = nullptr;
    long A_ = 1, B_ = 0, C_ = 1, n_ = 1;
    std::vector<char> unit_;
    long nunits_ = 0;
};

// Unit group of a residue ring as a product of cyclic groups.
struct UnitGroup {
    std::vector<long> gens;     // residue indices
    std::vector<int> orders;
    std::vector<std::vector<int>> dlog;  // per residue index; empty for non-units
    long order() const;
    long exponent() const;
};
UnitGroup unit_group(const ResidueRing& R);

class DirichletChar;

// Level data: O/N with its CRT factors and unit generators ordered by
// (norm of prime, generator).
class Modulus {
public:
    Modulus() = default;
    explicit Modulus(const Ideal& N);

    const Ideal& ideal() const { return N_; }
    long size() const { return R_.size(); }
    const ResidueRing& ring() const { return R_; }
    int nlocal() const { return (int)local_.size(); }
    const ResidueRing& local_ring(int i) const { return local_[i]; }
    const UnitGroup& local_units(int i) const { return lunits_[i]; }
    const IQInt& local_prime(int i) const { return N_.factors[i].first; }
    int local_exp(int i) const { return N_.factors[i].second; }
    // generators of the whole unit group: local generators concatenated
    int ngens() const { return (int)gen_local_.size(); }
    int gen_order(int g) const { return gen_order_[g]; }
    int gen_local(int g) const { return gen_local_[g]; }
    long exponent() const { return exponent_; }
    long unit_count() const;
    // decompose a residue of the global ring into local residues
    std::vector<long> to_local(long i) const;
    // exponent vector (over all generators) of a unit given by local residues
    std::vector<int> dlog(const std::vector<long>& loc) const;
    std::vector<DirichletChar> characters() const;
    // element of O with the given local residues
    IQInt crt_lift(const std::vector<long>& loc) const;
    // global element reducing to generator g locally and to 1 elsewhere
    IQInt gen_element(int g) const;

private:
    Ideal N_;
    ResidueRing R_;
    std::vector<ResidueRing> local_;
    std::vector<UnitGroup> lunits_;
    std::vector<int> gen_order_, gen_local_;
    long exponent_ = 1;
};

class DirichletChar {
public:
    DirichletChar() = default;
    DirichletChar(const Modulus* M, std::vector<int> exps);

    const Modulus& modulus() const { return *M_; }
    const std::vector<int>& exps() const { return e_; }
    int order() const { return order_; }
    bool is_trivial() const { return order_ == 1; }
    // value as exponent k of zeta_n with n = order(); -1 for non-units
    int value_local(int i, long local_residue) const;
    int value(const std::vector<long>& local_residues) const;
    int value_global(long residue) const;
    int value_at(const IQInt& x) const;
    int local_order(int i) const;
    int sign() const;  // eps(-1) as +1 / -1
    Ideal conductor() const;
    int conductor_exp(int i) const;
    DirichletChar pow(int k) const;
    std::vector<DirichletChar> galois_orbit() const;
    bool operator==(const DirichletChar& o) const { return e_ == o.e_; }
    bool operator<(const DirichletChar& o) const { return e_ < o.e_; }
    std::string str() const;  // "[e1,...,er]@N"

private:
    const Modulus* M_ = nullptr;
    std::vector<int> e_;
    int order_ = 1;
};
DirichletChar parse_char(const std::string& s, const Modulus* M);
// chi mod a divisor of M, viewed as a character mod M
DirichletChar induce(const DirichletChar& chi, const Modulus& M);
// the character mod D (D a multiple of the conductor) inducing eps, if any
std::optional<DirichletChar> restrict_char(const DirichletChar& eps, const Modulus& D);

// P^1(O/N): pairs (c, d) with (c, d, N) = 1 modulo units of O/N. Normalization
// is done locally at each prime power; the global index is mixed radix over the
// local indices with the first prime slowest.
class ProjLine {
public:
    explicit ProjLine(const Modulus& M);

    long size() const { return n_; }
    const Modulus& modulus() const { return *M_; }

    struct LocalMat { std::array<long, 4> e; };
    struct RedMat { std::vector<LocalMat> loc; };
    RedMat reduce(const Mat2& g) const;

    // x*g = u*rep; returns rep index (or -1 when (c,d)g is not primitive) and
    // writes the local units u
    long act(long x, const RedMat& g, long* units) const;
    // rep of an arbitrary pair given by local residues
    long normalize(const long* c, const long* d, long* units) const;
    long index_of(const IQInt& c, const IQInt& d, long* units) const;
    std::pair<IQInt, IQInt> rep(long x) const;
    std::pair<long, long> local_rep(long x, int i) const;
    long local_size(int i) const { return (long)lreps_[i].size(); }

private:
    const Modulus* M_;
    long n_ = 1;
    std::vector<std::vector<std::pair<long, long>>> lreps_;
    std::vector<std::vector<int32_t>> lcanon_;  // (c*m + d) -> rep index, -1 if not primitive
    std::vector<std::vector<int32_t>> lunit_;   // (c*m + d) -> unit residue
    std::vector<long> radix_;
};

long proj_line_size_formula(const Ideal& N);

}  // namespace bianchi
