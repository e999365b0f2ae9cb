#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "bianchi/iq_ring.hpp"

namespace bianchi {

// local factor of the Eisenstein count; r = v_p(N), s = v_p(f), l = N(p)
long lambda(int r, int s, long l);

// |(O/I)^x|
long phi_ideal(const Ideal& I);
// all ideals of norm <= X (canonical generators), by norm
std::vector<Ideal> ideals_up_to(long X, long d = -2);

// Subgroups H of (O/N)^x as sorted lists of global residue indices.
std::vector<long> subgroup_full(const Modulus& M);
std::vector<long> subgroup_pm1(const Modulus& M);
std::vector<long> subgroup_trivial(const Modulus& M);
std::vector<long> subgroup_kernel(const DirichletChar& eps);
bool is_subgroup(const Modulus& M, const std::vector<long>& H);
std::vector<long> subgroup_generators(const Modulus& M, const std::vector<long>& H);

// Cusps of Gamma_H(N). The divisor sum uses the image of {+-1}H modulo
// lcm(d, N/d): -I fixes every cusp so H and -H give the same count.
long cusp_count(const Modulus& M, const std::vector<long>& H);
// orbits of primitive pairs (c, d) mod N under H-scaling, d -> d + c x and -1
long cusp_count_brute(const Modulus& M, const std::vector<long>& H);
// |(O/N)^x| / |H| * |P^1(O/N)|, the closed form stated alongside the divisor sum
mpq_class cusp_count_prefactor(const Modulus& M, const std::vector<long>& H);

// Eisenstein dimension for conductor f at level N, trivial-coefficient
// correction when k = 0 and f = (1); parity is the caller's business
long eisenstein_sum(const Ideal& N, const Ideal& f, int k);
long eisenstein_product(const Ideal& N, const Ideal& f, int k);
// both forms, checked against each other; 0 when eps(-1) = -1
long eisenstein_dim(const DirichletChar& eps, int k);

struct MoebiusReport {
    bool ok = true;
    std::vector<std::string> lines;
};
// (a) sum over characters trivial on ker(eps) of nu(chi) = cusps(Gamma_ker eps) - [k = 0]
// (b) vector Moebius inversion back to nu(eps), where ker(eps^delta) is the joint
//     kernel of the components eps_i^(k_i delta_i); both for every character mod N
MoebiusReport moebius_consistency(const Modulus& M, int k = 0);

// key of the primitive character underlying eps, stable across levels
std::string primitive_key(const DirichletChar& eps);

// Old/new bookkeeping. Rows are per (level, primitive character, k, sign)
// where sign is 0 for the full space or +-1 for a J-eigenspace.
struct LedgerRow {
    Ideal level;
    Ideal conductor;
    std::string char_key;
    int k = 0;
    int sign = 0;
    long mult = 1;  // Galois orbit size represented by this row
    long total = 0, eis = 0, cusp = 0, old = 0, new_ = 0;
    std::string provenance;
};

class NewformLedger {
public:
    // cusp = total - eis and new = cusp - sum tau(N/M) new(M); throws when a
    // needed lower level is missing or new comes out negative
    const LedgerRow& update(const Ideal& level, const Ideal& conductor, const std::string& char_key, int k, int sign,
                            long total, long eis, long mult = 1, const std::string& provenance = "computed");
    // same with the cuspidal dimension given directly (eis recorded as given)
    const LedgerRow& update_cusp(const Ideal& level, const Ideal& conductor, const std::string& char_key, int k, int sign,
                                 long cusp, long eis, long mult = 1, const std::string& provenance = "computed");
    const LedgerRow* find(const Ideal& level, const std::string& char_key, int k, int sign) const;
    std::vector<Ideal> missing_levels(const Ideal& level, const Ideal& conductor, const std::string& char_key, int k,
                                      int sign) const;
    const std::vector<LedgerRow>& rows() const { return rows_; }
    // new dimensions summed over characters of each conductor, times mult
    std::string csv() const;
    std::string markdown(int k, int sign) const;

private:
    using Key = std::tuple<std::string, std::string, int, int>;
    std::map<Key, size_t> index_;
    std::vector<LedgerRow> rows_;
};

}  // namespace bianchi
