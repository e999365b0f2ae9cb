#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bianchi {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// ---------------------------------------------------------------------------
// word-size prime fields

struct Fp {
    u64 q = 0;
    Fp() = default;
    explicit Fp(u64 q_) : q(q_) {}
    u64 add(u64 a, u64 b) const { u64 s = a + b; return s >= q ? s - q : s; }
    u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + q - b; }
    u64 neg(u64 a) const { return a ? q - a : 0; }
    u64 mul(u64 a, u64 b) const { return (u64)((u128)a * b % q); }
    u64 pow(u64 a, u64 e) const;
    u64 inv(u64 a) const;  // throws on zero
    u64 from(i64 a) const;
    u64 from(const mpz_class& a) const;
    u64 from(const mpq_class& a) const;  // throws if the denominator vanishes mod q
    i64 lift(u64 a) const { return a > q / 2 ? (i64)a - (i64)q : (i64)a; }
};

bool is_prime_u64(u64 n);
// primes q < 2^62 with q = 1 mod n, optionally with d a square mod q; deterministic
std::vector<u64> choose_primes(int count, u64 n, long d = 0, u64 start = (u64(1) << 62) - 1);
u64 primitive_root_of_unity(const Fp& F, u64 n);
u64 sqrt_mod(const Fp& F, u64 a);  // throws if a is not a square

mpz_class crt(const mpz_class& a, const mpz_class& m, u64 b, u64 q);
std::optional<mpq_class> rational_reconstruct(const mpz_class& a, const mpz_class& m);

// ---------------------------------------------------------------------------
// dense matrices over F_q

struct ModMat {
    int r = 0, c = 0;
    std::vector<u64> a;
    ModMat() = default;
    ModMat(int r_, int c_) : r(r_), c(c_), a((size_t)r_ * c_, 0) {}
    u64& at(int i, int j) { return a[(size_t)i * c + j]; }
    u64 at(int i, int j) const { return a[(size_t)i * c + j]; }
    static ModMat identity(int n);
    bool is_zero() const;
    bool operator==(const ModMat& o) const { return r == o.r && c == o.c && a == o.a; }
};

ModMat mul(const Fp& F, const ModMat& A, const ModMat& B);
ModMat sub(const Fp& F, const ModMat& A, const ModMat& B);
ModMat transpose(const ModMat& A);
ModMat hstack(const ModMat& A, const ModMat& B);
ModMat select_cols(const ModMat& A, const std::vector<int>& cols);
// in-place reduced row echelon form; returns pivot columns
std::vector<int> rref(const Fp& F, ModMat& A);
int rank(const Fp& F, ModMat A);
// basis of the right kernel as columns
ModMat kernel(const Fp& F, const ModMat& A);
// columns of W span a T-stable subspace; returns X with T W = W X
ModMat restrict_to(const Fp& F, const ModMat& T, const ModMat& W);
// canonical basis of the column span: transpose of the RREF of W^T
ModMat canonical_basis(const Fp& F, const ModMat& W);
// coefficients c_0..c_n of det(xI - A), c_n = 1
std::vector<u64> charpoly(const Fp& F, const ModMat& A);
// intersection of column spans
ModMat intersect(const Fp& F, const ModMat& A, const ModMat& B);

// polynomials over F_q, coefficient i is x^i
using ModPoly = std::vector<u64>;
void poly_trim(ModPoly& f);
ModPoly poly_mod(const Fp& F, ModPoly a, const ModPoly& m);
ModPoly poly_mulmod(const Fp& F, const ModPoly& a, const ModPoly& b, const ModPoly& m);
ModPoly poly_gcd(const Fp& F, ModPoly a, ModPoly b);
ModPoly poly_powmod_x(const Fp& F, const mpz_class& e, const ModPoly& m);  // x^e mod m
std::vector<u64> poly_roots(const Fp& F, const ModPoly& f);  // distinct roots in F_q
// degrees of the distinct-degree factorization of a squarefree part, as (degree, total degree) pairs
std::vector<std::pair<int, int>> distinct_degree(const Fp& F, ModPoly f);

// ---------------------------------------------------------------------------
// sparse elimination mod q

using SparseRow = std::vector<std::pair<int, u64>>;  // sorted by column

// Incremental row echelon form over F_q. Rows are reduced on insertion against
// the current pivots; finish() back-substitutes to reduced form.
class SparseEchelon {
public:
    SparseEchelon(const Fp& F, int ncols);
    // returns true if the row was independent
    bool insert(const SparseRow& row);
    int rank() const { return nrank_; }
    int ncols() const { return n_; }
    void finish();
    bool is_pivot(int c) const { return piv_[c] >= 0; }
    const std::vector<int>& free_cols() const { return free_; }
    // after finish(): for a pivot column, the row (without the pivot) such that
    // e_c = -sum row[j] e_j modulo the row space; free columns only
    const SparseRow& pivot_row(int c) const { return rows_[piv_[c]]; }

private:
    void reduce(std::vector<u64>& acc, std::vector<int>& touched, std::vector<char>& mark, bool full) const;
    Fp F_;
    int n_;
    int nrank_ = 0;
    std::vector<int> piv_;  // column -> row index or -1
    std::vector<SparseRow> rows_;
    std::vector<int> free_;
    bool finished_ = false;
};

int sparse_rank(const Fp& F, int ncols, const std::vector<SparseRow>& rows);

// ---------------------------------------------------------------------------
// exact scalars in Q(sqrt d)(zeta_n)

class CycField {
public:
    // d = 0 means no square-root factor
    CycField(int n, long d);
    int n() const { return n_; }
    long d() const { return d_; }
    int phi() const { return phi_; }
    int degree() const { return deg_; }
    // coefficients of Phi_n, low degree first (leading 1)
    const std::vector<long>& cyclotomic() const { return phin_; }
    static const CycField* get(int n, long d);

private:
    int n_;
    long d_;
    int phi_, deg_;
    std::vector<long> phin_;
};

std::vector<long> cyclotomic_poly(int n);
int euler_phi(long n);

// basis index i + phi*j  <->  zeta^i * sqrt(d)^j
class CycScalar {
public:
    CycScalar() = default;
    explicit CycScalar(const CycField* F);
    CycScalar(const CycField* F, const mpq_class& r);
    static CycScalar zeta_power(const CycField* F, long k);
    static CycScalar sqrt_d(const CycField* F);

    const CycField* field() const { return F_; }
    const std::vector<mpq_class>& coeffs() const { return c_; }
    mpq_class& operator[](int i) { return c_[i]; }
    const mpq_class& operator[](int i) const { return c_[i]; }

    CycScalar operator+(const CycScalar& o) const;
    CycScalar operator-(const CycScalar& o) const;
    CycScalar operator-() const;
    CycScalar operator*(const CycScalar& o) const;
    CycScalar operator*(const mpq_class& r) const;
    CycScalar& operator+=(const CycScalar& o) { return *this = *this + o; }
    CycScalar& operator-=(const CycScalar& o) { return *this = *this - o; }
    CycScalar& operator*=(const CycScalar& o) { return *this = *this * o; }
    bool operator==(const CycScalar& o) const { return c_ == o.c_; }
    bool operator!=(const CycScalar& o) const { return !(*this == o); }
    bool is_zero() const;
    bool is_rational() const;
    CycScalar inverse() const;  // throws on zero (or zero divisor)
    CycScalar conj() const;           // sqrt d -> -sqrt d
    CycScalar galois(long k) const;   // zeta -> zeta^k, k prime to n
    // image in F_q with zeta -> r, sqrt d -> s
    u64 reduce(const Fp& F, u64 r, u64 s = 0) const;
    std::string str() const;  // "c0,c1,...@n,d"
    std::string pretty() const;
    static CycScalar parse(const std::string& s);

private:
    const CycField* F_ = nullptr;
    std::vector<mpq_class> c_;
};

// reconstruct a scalar of Q(zeta_n) from its images under zeta -> r^j for all
// j prime to n (j ascending), over one prime; nullopt if rational
// reconstruction fails
struct EmbeddingImages {
    u64 q;
    u64 r;                    // primitive n-th root mod q
    std::vector<u64> values;  // value at zeta -> r^j, j over units mod n ascending
};
std::vector<long> unit_residues(int n);
// solve the Vandermonde system: power-basis coordinates mod q
std::vector<u64> power_basis_coords(const Fp& F, int n, u64 r, const std::vector<u64>& vals);

// Accumulates power-basis coordinates over several primes and reconstructs.
class CycReconstructor {
public:
    CycReconstructor(const CycField* K, int count);
    // coords: count blocks of phi(n) power-basis coordinates mod q
    void add(u64 q, const std::vector<u64>& coords);
    // attempt reconstruction; returns scalars if every coordinate reconstructs
    std::optional<std::vector<CycScalar>> result() const;
    int nprimes() const { return (int)qs_.size(); }

private:
    const CycField* K_;
    int count_;
    mpz_class M_ = 1;
    std::vector<mpz_class> acc_;
    std::vector<u64> qs_;
};

// ---------------------------------------------------------------------------
// matrices over CycScalar

struct ExactMatrix {
    const CycField* F = nullptr;
    int r = 0, c = 0;
    std::vector<CycScalar> a;
    ExactMatrix() = default;
    ExactMatrix(const CycField* F_, int r_, int c_);
    CycScalar& at(int i, int j) { return a[(size_t)i * c + j]; }
    const CycScalar& at(int i, int j) const { return a[(size_t)i * c + j]; }
    static ExactMatrix identity(const CycField* F, int n);
    ExactMatrix operator*(const ExactMatrix& o) const;
    ExactMatrix operator-(const ExactMatrix& o) const;
    bool operator==(const ExactMatrix& o) const { return r == o.r && c == o.c && a == o.a; }
    ModMat reduce(const Fp& Fq, u64 zeta_img, u64 sqrtd_img = 0) const;
};

// exact elimination over the field
int rank_exact(ExactMatrix M);
std::vector<int> rref_exact(ExactMatrix& M);
ExactMatrix kernel_exact(const ExactMatrix& M);
// rank mod several split primes, maximum taken; certified exactly when small
struct RankResult {
    int rank;
    int modular_rank;
    bool certified;
    std::vector<u64> primes;
};
RankResult rank_multimodular(const ExactMatrix& M, int nprimes = 3, int exact_limit = 500);
// monic char poly over the field, low degree first
std::vector<CycScalar> charpoly_exact(const ExactMatrix& M);

// reduction modulo a degree-one prime above p: (p, zeta - g, sqrt d - s)
struct ModpReduction {
    u64 p;
    u64 zeta_img;
    u64 sqrtd_img;
    std::string str() const;
};
// least (g, s) lexicographically for which (p, zeta - g, sqrt d - s) is a prime of
// residue degree one; throws if there is none
ModpReduction choose_reduction(const CycField* K, u64 p);
u64 reduce_scalar(const CycScalar& x, const ModpReduction& red);  // throws if not p-integral
ModMat reduce_mod(const ExactMatrix& M, const ModpReduction& red);

nlohmann::json matrix_to_json(const ExactMatrix& M);
ExactMatrix matrix_from_json(const nlohmann::json& j);

std::string poly_str(const std::vector<CycScalar>& coeffs, const char* var = "x");

}  // namespace bianchi
