#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bianchi/dimension_formulas.hpp"
#include "bianchi/hecke.hpp"
#include "json.hpp"

namespace bianchi {

// Ordinary p-adic family through a trivial-weight newform at seed_level,
// tame level `tame`; p must split.
struct FamilySpec {
    std::string name;
    long d = -2;
    long p = 3;
    IQInt tame;
    IQInt seed_level;
    int seed_sign = 1;               // J-sign of the seed
    std::vector<int> probe_weights{2};
    long prime_bound = 30;           // T_l with N(l) <= bound, l prime to tame*p
};
// the four families of the examples: three expected finite, one base change
std::vector<FamilySpec> example_families();

struct WeightProbe {
    std::vector<std::pair<int, long>> cusp_dims;  // (k, dim) at Gamma_0(tame)
    std::optional<int> zero_at;
};
WeightProbe weight_probe(const Ideal& N, const std::vector<int>& ks);

struct CellDims {
    long total = 0, eis = 0, cusp = 0, plus = 0, minus = 0;
    long new_full = 0, new_plus = 0, new_minus = 0;
    bool odd = false;
};

// New-subspace dimensions for levels D | tame * (pi pibar)^r and nebentypus of
// p-power conductor, one entry per Galois orbit of characters.
class DimensionTable {
public:
    DimensionTable(const Ideal& tame, long p, int r);
    ~DimensionTable();
    struct Orbit {
        DirichletChar chi;  // mod (pi pibar)^r
        int size = 1;
        Ideal conductor;
        int c1 = 0, c2 = 0;  // conductor exponents at pi, pibar
    };
    const std::vector<Orbit>& orbits() const { return orbits_; }
    const std::vector<IQInt>& primes_above_p() const { return pp_; }
    const Ideal& top() const { return L_; }
    const Modulus& modulus(const Ideal& D);
    DirichletChar char_at(const Ideal& D, const Orbit& o);
    const CellDims& dims(const Ideal& D, const Orbit& o);
    Ideal tame_part(const Ideal& D) const;
    std::pair<int, int> p_exps(const Ideal& D) const;
    std::string p_label(int a, int b) const;  // 1, pi, 3pi, 9, ...
    std::string level_label(const Ideal& D, const Ideal& tame) const;
    const NewformLedger& ledger() const { return ledger_; }
    // table of new dimensions over all D | tame * p^r; conductor
    // columns up to (pi pibar)^r; bold cells flagged by `bold`
    std::string markdown(const Ideal& tame, const std::function<bool(const Ideal&, const Orbit&)>& bold);
    nlohmann::json json();

private:
    Ideal tame_, L_;
    long p_;
    int r_;
    std::vector<IQInt> pp_;
    std::unique_ptr<Modulus> P_, ML_;
    std::map<std::string, std::unique_ptr<Modulus>> mods_;
    std::vector<Orbit> orbits_;
    std::map<std::string, CellDims> dims_;
    NewformLedger ledger_;
};

struct SeedData {
    std::string level;
    int dim = 0;  // new part of the seed sign; must be 1
    std::map<std::string, long> a;  // T eigenvalues at good primes
    std::map<std::string, std::string> local;  // U/T eigenvalues above p
    OrdinarityVerdict ordinarity;
};

struct Candidate {
    std::string level, level_label, cond_label, chi;
    int orbit = 1;
    int a = 0, b = 0, c1 = 0, c2 = 0;
    int depth = 0;
    CellDims dims;
    long space_dim = 0;  // new part of the seed sign, per character
    std::string status;
    CongruenceResult cong;
    std::vector<std::string> notes;
};

struct DepthResult {
    int depth = 0;
    std::vector<Candidate> candidates;
    int survivors = 0;
    bool complete = true;
    std::string table;  // Markdown
};

struct RunOptions {
    int max_depth = 2;
    double budget_seconds = 4 * 3600.0;
    bool verbose = false;
};

struct FinitenessReport {
    FamilySpec spec;
    WeightProbe probe;
    SeedData seed;
    std::vector<DepthResult> depths;
    std::string verdict;  // FINITE_CLASSICAL_POINTS, DIAGONAL_SUSPECT, INCONCLUSIVE(i)
    int verdict_depth = 0;
    std::vector<std::string> notes;
    std::string markdown() const;
    nlohmann::json json() const;
};

// eligibility of a (level, nebentypus) cell: tame part equal to N, the local
// classification allows a unit U-eigenvalue above p, level not prime to p
bool eligible_cell(int a, int b, int c1, int c2, bool tame_matches, int k = 0);

SeedData seed_data(const FamilySpec& spec);
DepthResult depth_scan(const FamilySpec& spec, const SeedData& seed, int depth, double deadline_seconds = 1e18,
                       bool verbose = false);
FinitenessReport run_family(const FamilySpec& spec, const RunOptions& opt = {});

// Newforms at Gamma_0(I), trivial character: counts per J-sign, rationality
// of each eigensystem and ordinarity at p.
struct NewformInfo {
    int sign = 0;
    int degree = 1;  // size of the Hecke orbit
    bool rational = false;
    Ordinarity ordinary = Ordinarity::Undetermined;
    Ordinarity ordinary_at_level = Ordinarity::Undetermined;  // primes above p dividing the level only
    std::map<std::string, std::string> eigenvalues;
};
struct LevelCensus {
    std::string level;
    std::string factorization;
    int plus = 0, minus = 0;
    std::vector<NewformInfo> forms;
};
LevelCensus newform_census(const IQInt& level, long p, long prime_bound = 30);

}  // namespace bianchi
