#pragma once

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bianchi/cohomology.hpp"
#include "bianchi/exact_linalg.hpp"
#include "bianchi/iq_ring.hpp"

namespace bianchi {

// Matrices of determinant l from the continued-fraction expansions of r/l over
// centred residues r; the first N(l)+1 entries form the coset skeleton.
std::vector<Mat2> heilbronn_set(const IQInt& l);
std::vector<Mat2> coset_skeleton(const IQInt& l);

enum class Part { Full, Cusp, CuspPlus, CuspMinus };
const char* part_name(Part p);
int part_sign(Part p);  // 0, 0, +1, -1

// Hecke action on the symbol presentation at one embedding.
class HeckeSpace {
public:
    HeckeSpace(const ProjLine& P, const DirichletChar& eps, const Embedding& E);
    const SymbolSpace& symbols() const { return sp_; }
    const Embedding& embedding() const { return sp_.embedding(); }
    const DirichletChar& character() const { return *eps_; }
    const Modulus& modulus() const { return P_->modulus(); }
    int dim() const { return sp_.dim(); }
    // T_l for l prime to the level, U_l (non-invertible terms dropped) otherwise;
    // checked to preserve the relations, throws otherwise
    const ModMat& op(const IQInt& l);
    const ModMat& J();
    // basis columns in symbol coordinates, canonical form
    const ModMat& part(Part p);

private:
    const ProjLine* P_;
    const DirichletChar* eps_;
    SymbolSpace sp_;
    std::map<std::string, ModMat> ops_;
    std::optional<ModMat> J_;
    std::map<int, ModMat> parts_;
};

// linear combination sum c_i T_{l_i} mod q
using HeckeCombo = std::vector<std::pair<IQInt, u64>>;

// All levels D with cond(eps) | D | L at one embedding; old/new bookkeeping by
// characteristic polynomials.
class LevelTower {
public:
    LevelTower(const Modulus& M, const DirichletChar& eps, const Embedding& E);
    ~LevelTower();
    HeckeSpace& top() { return at(M_->ideal()); }
    HeckeSpace& at(const Ideal& D);
    std::vector<Ideal> levels() const;  // D with cond | D | L
    // char poly of a combination on the new part of `part` at level D
    ModPoly new_charpoly(const Ideal& D, Part part, const HeckeCombo& T);
    // new subspace at the top level inside `part` (columns in symbol coords);
    // separating operators tried in order, then pairwise combinations
    ModMat new_subspace(Part part, const std::vector<IQInt>& sep);

private:
    struct Level;
    const Modulus* M_;
    const DirichletChar* eps_;
    Embedding E_;
    std::map<std::string, std::unique_ptr<Level>> levels_;
    std::map<std::string, ModPoly> cp_cache_;
};

struct SubspaceSpec {
    Part part = Part::Cusp;
    bool new_only = false;
    std::vector<IQInt> sep;  // operators used to split off old forms
};

// Hecke operators restricted to a subspace, exactly over Q(zeta_n).
struct ExactOperators {
    const CycField* K = nullptr;
    std::string level, character;
    int dim = 0;
    std::map<std::string, ExactMatrix> ops;  // keyed by generator string, "J" for J
    int primes_used = 0;
    std::vector<CycScalar> charpoly(const std::string& key) const { return charpoly_exact(ops.at(key)); }
};
ExactOperators exact_operators(const Modulus& M, const DirichletChar& eps, const SubspaceSpec& spec,
                               const std::vector<IQInt>& ls, bool with_J = false, int max_primes = 12);

// Joint eigensystems of commuting exact operators, read off modulo a split prime
// and recognised in Q(zeta_n) when phi(n) <= 2.
struct EigenSystem {
    int mult = 0;        // dimension of the joint generalized eigenspace
    bool split = true;   // all operators have their eigenvalue in F_q
    bool recognized = false;
    std::map<std::string, CycScalar> values;
    std::map<std::string, u64> images;
};
std::vector<EigenSystem> eigensystems(const ExactOperators& X, const std::vector<std::string>& keys);
std::optional<CycScalar> recognize(const CycField* K, const Fp& F, u64 zeta_img, u64 a);
bool is_root(const std::vector<CycScalar>& poly, const CycScalar& x);

// numerical roots (Aberth) under zeta -> exp(2 pi i j / n)
std::vector<std::complex<long double>> complex_roots(const std::vector<CycScalar>& poly, long j = 1);
// eigenvalues of T_l outside |a| <= 2 sqrt N(l), counted with multiplicity, per embedding
std::vector<int> ramanujan_violations(const std::vector<CycScalar>& charpoly, const IQInt& l);
extern const long double kRamanujanTol;

// Ordinarity at a prime p from local data at each prime above p.
enum class Ordinarity { Ordinary, NonOrdinary, Undetermined };
const char* ordinarity_name(Ordinarity o);
struct PrimeAboveP {
    IQInt prime;
    int level_exp = 0;
    int cond_exp = 0;
    std::optional<CycScalar> eigenvalue;  // T eigenvalue if level_exp = 0, else U eigenvalue
};
struct OrdinarityVerdict {
    Ordinarity verdict = Ordinarity::Undetermined;
    std::vector<std::string> notes;
};
OrdinarityVerdict ordinarity(const std::vector<PrimeAboveP>& data, const ModpReduction& red, int k = 0);
// whether the local classification allows a unit U-eigenvalue at all
bool ordinary_allowed(int level_exp, int cond_exp, int k = 0);

// Is there an eigensystem on the candidate space congruent to the target modulo
// a degree-one prime above p, inside the ordinary part? Works on the
// p-saturated Hecke-stable lattice.
struct CongruenceResult {
    bool possible = true;
    bool prefilter_eliminated = false;
    int lattice_rank = 0;
    int reduced_dim = 0;
    int ordinary_dim = -1;  // dimension of the surviving space after the ordinary filter
    std::vector<std::pair<std::string, int>> witness;  // joint generalized kernel after each operator
    std::string reduction;
    std::vector<std::string> notes;
};
CongruenceResult congruence_eliminate(const ExactOperators& X, const std::map<std::string, long>& target, u64 p,
                                      const std::vector<std::string>& ordinary_keys);

}  // namespace bianchi
