#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bianchi/exact_linalg.hpp"
#include "bianchi/iq_ring.hpp"

namespace bianchi {

// Images mod q of the coefficient field: zeta_n -> zeta, sqrt(d) -> sqrtd.
struct Embedding {
    Fp F;
    int n = 1;
    u64 zeta = 1;
    long d = 0;
    u64 sqrtd = 0;
    std::vector<u64> zpow;  // zeta^k, k < n
    u64 zeta_pow(long k) const { return zpow[((k % n) + n) % n]; }
    u64 image(const IQInt& x) const;  // a + b*w with w = sqrt d or (1+sqrt d)/2
};
// zeta -> r^j with r the primitive n-th root chosen for q; sqrt d only when d != 0
Embedding make_embedding(u64 q, int n, long d, long j = 1);
// primes q = 1 mod n (and with d a square mod q when d != 0), counting down from 2^62
std::vector<u64> embedding_primes(int count, int n, long d);

int element_order(const Mat2& g, int max_order = 12);

// Character values on local unit residues as exponents of zeta_n.
class CharValues {
public:
    CharValues(const DirichletChar& eps, int n);
    int exponent(const long* local_units) const;
    int exponent_at(const IQInt& x) const;

private:
    const DirichletChar* eps_;
    int n_;
    std::vector<std::vector<int>> val_;
};

// Cellular data of the fundamental domain for SL2(O) acting on hyperbolic space:
// the two 2-cells are glued along six edge classes whose stabilizers are
// generated by stab[i]; G twists the second edge in the second cell.
struct CellDomainData {
    long d;
    int two_cells;
    int edges;
    std::array<Mat2, 6> stab;
    std::array<int, 6> orders;
    Mat2 G;
    static const CellDomainData& get(long d);
    static bool available(long d);
    void verify() const;  // throws if an order or determinant is wrong
};

// Sym^k (x) conj-Sym^k, basis X^i Y^(k-i) (x) X^j Y^(k-j) at index i*(k+1)+j.
// g acts by (g.P)(X,Y) = P(aX+cY, bX+dY); the second factor uses the complex
// conjugate of g.
class WeightModule {
public:
    WeightModule(int k, long d) : k_(k), d_(d) {}
    int k() const { return k_; }
    int dim() const { return (k_ + 1) * (k_ + 1); }
    ModMat action(const Embedding& E, const Mat2& g) const;

private:
    ModMat sym(const Fp& F, u64 a, u64 b, u64 c, u64 d) const;
    int k_;
    long d_;
};

// Ind(eps) (x) V_{k,k} as functions on P^1(O/N) with values in V. A matrix h
// acts by (h F)(x) = eps(u) rho_V(h) F(y) where x h = u y. Each coset block has
// dimension (k+1)^2 and the global index is x*(k+1)^2 + i.
class InducedModule {
public:
    InducedModule(const ProjLine& P, const DirichletChar& eps, int k, const Embedding& E, unsigned shuffle_seed = 0);
    long cosets() const { return n_; }
    int fiber() const { return W_.dim(); }
    long dim() const { return n_ * W_.dim(); }
    const Embedding& embedding() const { return E_; }

    struct Action {
        std::vector<long> target;
        std::vector<u64> scal;
        ModMat fiber;
    };
    Action act(const Mat2& g) const;
    // fixed vectors of a finite-order element, computed orbit by orbit
    std::vector<SparseRow> fixed_subspace(const Mat2& g) const;
    // dense action and averaging projector; for small modules and tests
    ModMat dense(const Mat2& g) const;
    ModMat averaging_projector(const Mat2& g) const;

private:
    const ProjLine* P_;
    const DirichletChar* eps_;
    WeightModule W_;
    Embedding E_;
    long n_;
    CharValues cv_;
    std::vector<long> twist_;  // per-coset exponent from reshuffled representatives
};

struct D1Result {
    long e1_dim = 0;   // dim of the codomain M^{-I} + M^{-I}
    long d1_cols = 0;  // dim of the domain (sum of edge fixed spaces)
    long d1_rank = 0;
    long h2_dim = 0;
    bool forced_zero = false;
    u64 q = 0;
};
// columns of the differential as sparse vectors in the codomain
std::vector<SparseRow> d1_columns(const InducedModule& M, const CellDomainData& C);
D1Result h2_by_d1(const ProjLine& P, const DirichletChar& eps, int k, u64 q, unsigned shuffle_seed = 0);

// Manin-symbol presentation of the same H^2 at trivial weight. Symbols [x] for
// x in P^1(O/N) with [u x] = eps(u)^-1 [x], modulo the relations
//   [x] = [x(-I)],  [x] + [xS] = 0,  [x] + [xT1] + [xT2] = 0,
//   [xS] + [xA] + [xB] - [xC] = 0.
class SymbolSpace {
public:
    SymbolSpace(const ProjLine& P, const DirichletChar& eps, const Embedding& E);

    const Embedding& embedding() const { return E_; }
    const ProjLine& proj_line() const { return *P_; }
    int dim() const { return (int)basis_.size(); }
    // symbols chosen as basis (coset indices)
    const std::vector<long>& basis() const { return basis_; }
    // [x g] = c [k]; returns k or -1 when x g is not primitive
    long sym(long x, const ProjLine::RedMat& g, u64* c) const;
    // add coef*[x] in basis coordinates to acc
    void add_symbol(long x, u64 coef, std::vector<u64>& acc) const;
    std::vector<u64> coords(long x) const;

    // sum_h [x h] on basis symbols; with drop, non-primitive terms are skipped
    ModMat op(const std::vector<Mat2>& H, bool drop = false) const;
    ModMat J() const;
    // checks that the operator maps every relation to zero in the quotient
    bool preserves_relations(const std::vector<Mat2>& H, bool drop = false) const;

    int cusp_classes() const { return ncusp_; }
    const ModMat& boundary() const { return boundary_; }
    // kernel of the boundary map, columns in basis coordinates
    const ModMat& cusp_basis() const { return cusp_; }

private:
    long find(long x, u64* s) const;
    void build_relations();
    void build_cusps();
    std::vector<std::vector<std::pair<Mat2, int>>> relation_sets() const;

    const ProjLine* P_;
    const DirichletChar* eps_;
    Embedding E_;
    long n_;
    CharValues cv_;
    // union-find over symbols for the 2-term relations
    mutable std::vector<long> parent_;
    mutable std::vector<u64> pscal_;
    std::vector<char> dead_;  // by root
    std::vector<long> root_col_;  // root -> echelon column or -1
    std::vector<long> col_root_;
    std::optional<SparseEchelon> ech_;
    std::vector<long> basis_;      // basis symbols (roots)
    std::vector<int> col_basis_;   // echelon column -> basis index or -1
    int ncusp_ = 0;
    ModMat boundary_, cusp_;
};

// Metadata plus dimensions from both routes.
struct CohSpace {
    long d = -2;
    std::string level;
    std::string character;
    int k = 0;
    int char_order = 1;
    long cosets = 0;
    D1Result d1;
    int symbol_dim = -1;  // -1 when not computed (k > 0)
    long dim() const { return d1.h2_dim; }
};
CohSpace h2_space(const Modulus& M, const DirichletChar& eps, int k, bool with_symbols = true);

// Optional on-disk cache: directory from BIANCHI_CACHE, disabled when unset.
std::optional<nlohmann::json> cache_get(const std::string& kind, const std::string& key);
void cache_put(const std::string& kind, const std::string& key, const nlohmann::json& value);
extern const char* kCodeVersion;

}  // namespace bianchi
