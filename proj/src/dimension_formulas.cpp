#include "bianchi/dimension_formulas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bianchi {

long lambda(int r, int s, long l) {
    if (s < 0 || r < std::max(s, 1) || l < 2) throw std::domain_error("lambda: need s >= 0, r >= max(s, 1)");
    auto pw = [&](int e) {
        long v = 1;
        for (int i = 0; i < e; ++i) v *= l;
        return v;
    };
    if (2 * s > r) return 2 * pw(r - s);
    if (r % 2 == 0) return pw(r / 2) + pw(r / 2 - 1);
    return 2 * pw(r / 2);
}

long phi_ideal(const Ideal& I) {
    long v = 1;
    for (auto& [p, e] : I.factors) {
        long np = p.norm().get_si();
        v *= np - 1;
        for (int k = 1; k < e; ++k) v *= np;
    }
    return v;
}

std::vector<Ideal> ideals_up_to(long X, long d) {
    const FieldCtx& f = FieldCtx::get(d);
    std::set<IQInt> seen;
    long B = 2 * (long)std::sqrt((double)X) + 2;
    for (long a = -B; a <= B; ++a)
        for (long b = -B; b <= B; ++b) {
            IQInt x(a, b, d);
            if (x.is_zero() || x.norm() > X) continue;
            seen.insert(x.canonical());
        }
    (void)f;
    std::vector<Ideal> out;
    for (auto& x : seen) out.emplace_back(x);
    std::stable_sort(out.begin(), out.end(), [](const Ideal& a, const Ideal& b) {
        if (a.norm() != b.norm()) return a.norm() < b.norm();
        return b.gen < a.gen;
    });
    return out;
}

std::vector<long> subgroup_full(const Modulus& M) {
    std::vector<long> H;
    for (long r = 0; r < M.size(); ++r)
        if (M.ring().is_unit(r)) H.push_back(r);
    return H;
}

std::vector<long> subgroup_pm1(const Modulus& M) {
    long d = M.ideal().gen.d();
    std::set<long> s = {M.ring().index(IQInt(1, 0, d)), M.ring().index(IQInt(-1, 0, d))};
    return {s.begin(), s.end()};
}

std::vector<long> subgroup_trivial(const Modulus& M) { return {M.ring().index(IQInt(1, 0, M.ideal().gen.d()))}; }

std::vector<long> subgroup_kernel(const DirichletChar& eps) {
    std::vector<long> H;
    const Modulus& M = eps.modulus();
    for (long r = 0; r < M.size(); ++r)
        if (M.ring().is_unit(r) && eps.value_global(r) == 0) H.push_back(r);
    return H;
}

bool is_subgroup(const Modulus& M, const std::vector<long>& H) {
    std::set<long> s(H.begin(), H.end());
    if (!s.count(M.ring().one())) return false;
    for (long a : s) {
        if (!M.ring().is_unit(a)) return false;
        for (long b : s)
            if (!s.count(M.ring().mul(a, b))) return false;
    }
    return true;
}

std::vector<long> subgroup_generators(const Modulus& M, const std::vector<long>& H) {
    const ResidueRing& R = M.ring();
    std::set<long> span = {R.one()};
    std::vector<long> gens;
    for (long h : H) {
        if (span.count(h)) continue;
        gens.push_back(h);
        std::vector<long> frontier(span.begin(), span.end());
        while (!frontier.empty()) {
            std::vector<long> next;
            for (long x : frontier)
                for (long g : gens) {
                    long y = R.mul(x, g);
                    if (span.insert(y).second) next.push_back(y);
                }
            frontier = std::move(next);
        }
    }
    return gens;
}

long cusp_count(const Modulus& M, const std::vector<long>& H) {
    if (!is_subgroup(M, H)) throw std::invalid_argument("cusp_count: H is not a subgroup of the unit group");
    const Ideal& N = M.ideal();
    long d = N.gen.d();
    std::set<long> pmH;
    long m1 = M.ring().index(IQInt(-1, 0, d));
    for (long h : H) pmH.insert(h), pmH.insert(M.ring().mul(h, m1));
    long total = 0;
    for (const Ideal& dv : N.divisors()) {
        Ideal co = N.quotient(dv);
        Ideal Nd = dv.lcm_with(co);
        long img = 1;
        if (!Nd.is_unit()) {
            ResidueRing R(Nd.gen);
            std::set<long> s;
            for (long h : pmH) s.insert(R.index(M.ring().element(h)));
            img = (long)s.size();
        }
        long num = phi_ideal(dv) * phi_ideal(co);
        if (num % img) throw std::logic_error("cusp_count: non-integral term");
        total += num / img;
    }
    return total;
}

long cusp_count_brute(const Modulus& M, const std::vector<long>& H) {
    const ResidueRing& R = M.ring();
    long n = R.size(), d = M.ideal().gen.d();
    // primitive pairs: not both in p at any local prime
    std::vector<char> in_p(n * (long)std::max(1, M.nlocal()), 0);
    for (long r = 0; r < n; ++r) {
        auto loc = M.to_local(r);
        for (int i = 0; i < M.nlocal(); ++i) in_p[r * M.nlocal() + i] = !M.local_ring(i).is_unit(loc[i]);
    }
    auto primitive = [&](long c, long e) {
        for (int i = 0; i < M.nlocal(); ++i)
            if (in_p[c * M.nlocal() + i] && in_p[e * M.nlocal() + i]) return false;
        return true;
    };
    std::vector<long> parent(n * n);
    std::iota(parent.begin(), parent.end(), 0L);
    std::function<long(long)> find = [&](long x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](long a, long b) {
        a = find(a), b = find(b);
        if (a != b) parent[a] = b;
    };
    auto gens = subgroup_generators(M, H);
    long one = R.index(IQInt(1, 0, d)), w = R.index(IQInt(0, 1, d)), m1 = R.index(IQInt(-1, 0, d));
    for (long c = 0; c < n; ++c)
        for (long e = 0; e < n; ++e) {
            if (!primitive(c, e)) continue;
            long x = c * n + e;
            for (long h : gens) unite(x, R.mul(h, c) * n + R.mul(h, e));
            unite(x, c * n + R.add(e, R.mul(c, one)));
            unite(x, c * n + R.add(e, R.mul(c, w)));
            unite(x, R.mul(m1, c) * n + R.mul(m1, e));
        }
    long count = 0;
    for (long c = 0; c < n; ++c)
        for (long e = 0; e < n; ++e)
            if (primitive(c, e) && find(c * n + e) == c * n + e) ++count;
    return count;
}

mpq_class cusp_count_prefactor(const Modulus& M, const std::vector<long>& H) {
    mpq_class v(phi_ideal(M.ideal()), (long)H.size());
    v *= proj_line_size_formula(M.ideal());
    v.canonicalize();
    return v;
}

long eisenstein_sum(const Ideal& N, const Ideal& f, int k) {
    if (!f.divides(N)) throw std::invalid_argument("conductor does not divide the level");
    Ideal Nf = N.quotient(f);
    long total = 0;
    for (const Ideal& dv : N.divisors()) {
        Ideal g = dv.gcd_with(N.quotient(dv));
        if (g.divides(Nf)) total += phi_ideal(g);
    }
    if (k == 0 && f.is_unit()) total -= 1;
    return total;
}

long eisenstein_product(const Ideal& N, const Ideal& f, int k) {
    if (!f.divides(N)) throw std::invalid_argument("conductor does not divide the level");
    long prod = 1;
    for (auto& [p, e] : N.factors) prod *= lambda(e, f.valuation(p), p.norm().get_si());
    if (k == 0 && f.is_unit()) prod -= 1;
    return prod;
}

long eisenstein_dim(const DirichletChar& eps, int k) {
    if (eps.sign() == -1) return 0;
    const Ideal& N = eps.modulus().ideal();
    Ideal f = eps.conductor();
    long a = eisenstein_sum(N, f, k), b = eisenstein_product(N, f, k);
    if (a != b) throw std::logic_error("Eisenstein forms disagree at level " + N.str());
    return a;
}

namespace {
int mobius(int n) {
    int m = 1;
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return 0;
            m = -m;
        }
    return n > 1 ? -m : m;
}
int phi_int(int n) {
    int r = n;
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            r -= r / p;
        }
    if (n > 1) r -= r / n;
    return r;
}
}  // namespace

MoebiusReport moebius_consistency(const Modulus& M, int k) {
    MoebiusReport rep;
    auto chars = M.characters();
    auto eis_H = [&](const std::vector<long>& H) { return cusp_count(M, H) - (k == 0 ? 1 : 0); };
    for (auto& eps : chars) {
        auto H = subgroup_kernel(eps);
        std::set<long> Hs(H.begin(), H.end());
        long lhs = 0;
        for (auto& chi : chars) {
            bool trivial_on_H = true;
            for (long h : H)
                if (chi.value_global(h) != 0) {
                    trivial_on_H = false;
                    break;
                }
            if (trivial_on_H) lhs += eisenstein_dim(chi, k);
        }
        long rhs = eis_H(H);
        if (lhs != rhs) {
            rep.ok = false;
            rep.lines.push_back("sum over characters trivial on ker " + eps.str() + ": " + std::to_string(lhs) +
                                " vs cusps " + std::to_string(rhs));
        }
        // vector inversion: eps = prod eps_i^{k_i}, n_i = order of eps_i^{k_i}
        int r = M.ngens();
        std::vector<int> n(r);
        long phin = 1;
        for (int g = 0; g < r; ++g) {
            int o = M.gen_order(g);
            n[g] = o / std::gcd(o, eps.exps()[g] == 0 ? o : eps.exps()[g]);
            phin *= phi_int(n[g]);
        }
        std::vector<int> delta(r, 1);
        long acc = 0;
        std::function<void(int)> rec = [&](int g) {
            if (g == r) {
                long mu = 1;
                std::vector<int> e(r);
                for (int i = 0; i < r; ++i) {
                    mu *= mobius(delta[i]);
                    e[i] = eps.exps()[i] * delta[i];
                }
                if (mu == 0) return;
                // joint kernel of the component characters eps_i^(k_i delta_i)
                std::vector<long> Hd;
                for (long h : subgroup_full(M)) {
                    auto dl = M.dlog(M.to_local(h));
                    bool in = true;
                    for (int i = 0; i < r && in; ++i) in = ((long)e[i] * dl[i]) % M.gen_order(i) == 0;
                    if (in) Hd.push_back(h);
                }
                acc += mu * eis_H(Hd);
                return;
            }
            for (int dd = 1; dd <= n[g]; ++dd)
                if (n[g] % dd == 0) {
                    delta[g] = dd;
                    rec(g + 1);
                }
            delta[g] = 1;
        };
        rec(0);
        long nu = eisenstein_dim(eps, k);
        if (acc != nu * phin) {
            rep.ok = false;
            rep.lines.push_back("inversion at " + eps.str() + ": " + std::to_string(acc) + "/" + std::to_string(phin) +
                                " vs " + std::to_string(nu));
        }
    }
    if (rep.ok) rep.lines.push_back("ok: " + std::to_string(chars.size()) + " characters at level " + M.ideal().str());
    return rep;
}

std::string primitive_key(const DirichletChar& eps) {
    Ideal f = eps.conductor();
    Modulus Mf(f);
    auto chi = restrict_char(eps, Mf);
    if (!chi) throw std::logic_error("primitive_key: no character at the conductor");
    return chi->str();
}

// ---------------------------------------------------------------------------

const LedgerRow* NewformLedger::find(const Ideal& level, const std::string& char_key, int k, int sign) const {
    auto it = index_.find({level.str(), char_key, k, sign});
    return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<Ideal> NewformLedger::missing_levels(const Ideal& level, const Ideal& conductor, const std::string& char_key,
                                                 int k, int sign) const {
    std::vector<Ideal> out;
    for (const Ideal& M : level.divisors()) {
        if (M == level || !conductor.divides(M)) continue;
        if (!find(M, char_key, k, sign)) out.push_back(M);
    }
    return out;
}

const LedgerRow& NewformLedger::update(const Ideal& level, const Ideal& conductor, const std::string& char_key, int k,
                                       int sign, long total, long eis, long mult, const std::string& provenance) {
    const LedgerRow& r = update_cusp(level, conductor, char_key, k, sign, total - eis, eis, mult, provenance);
    rows_[index_[{level.str(), char_key, k, sign}]].total = total;
    return r;
}

const LedgerRow& NewformLedger::update_cusp(const Ideal& level, const Ideal& conductor, const std::string& char_key,
                                            int k, int sign, long cusp, long eis, long mult,
                                            const std::string& provenance) {
    auto miss = missing_levels(level, conductor, char_key, k, sign);
    if (!miss.empty()) {
        std::string s;
        for (auto& m : miss) s += " " + m.str();
        throw std::runtime_error("ledger: missing lower levels for " + level.str() + ":" + s);
    }
    LedgerRow row;
    row.level = level;
    row.conductor = conductor;
    row.char_key = char_key;
    row.k = k;
    row.sign = sign;
    row.mult = mult;
    row.eis = eis;
    row.cusp = cusp;
    row.total = cusp + eis;
    row.provenance = provenance;
    for (const Ideal& M : level.divisors()) {
        if (M == level || !conductor.divides(M)) continue;
        long tau = (long)level.quotient(M).divisors().size();
        row.old += tau * find(M, char_key, k, sign)->new_;
    }
    row.new_ = row.cusp - row.old;
    if (row.cusp < 0 || row.new_ < 0)
        throw std::runtime_error("ledger: negative dimension at " + level.str() + " " + char_key);
    Key key{level.str(), char_key, k, sign};
    auto it = index_.find(key);
    if (it != index_.end()) {
        rows_[it->second] = row;
        return rows_[it->second];
    }
    index_[key] = rows_.size();
    rows_.push_back(row);
    return rows_.back();
}

std::string NewformLedger::csv() const {
    std::ostringstream os;
    os << "level,conductor,character,k,sign,mult,total,eisenstein,cusp,old,new,provenance\n";
    for (auto& r : rows_)
        os << r.level.str() << ',' << r.conductor.str() << ',' << '"' << r.char_key << '"' << ',' << r.k << ',' << r.sign
           << ',' << r.mult << ',' << r.total << ',' << r.eis << ',' << r.cusp << ',' << r.old << ',' << r.new_ << ','
           << r.provenance << '\n';
    return os.str();
}

std::string NewformLedger::markdown(int k, int sign) const {
    std::vector<Ideal> levels, conds;
    std::map<std::pair<std::string, std::string>, long> cell;
    for (auto& r : rows_) {
        if (r.k != k || r.sign != sign) continue;
        if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) levels.push_back(r.level);
        if (std::find(conds.begin(), conds.end(), r.conductor) == conds.end()) conds.push_back(r.conductor);
        cell[{r.level.str(), r.conductor.str()}] += r.new_ * r.mult;
    }
    std::sort(conds.begin(), conds.end(), [](const Ideal& a, const Ideal& b) {
        if (a.norm() != b.norm()) return a.norm() < b.norm();
        return b.gen < a.gen;
    });
    std::ostringstream os;
    os << "| level |";
    for (auto& c : conds) os << ' ' << c.str() << " |";
    os << "\n|---|";
    for (size_t i = 0; i < conds.size(); ++i) os << "---|";
    os << '\n';
    for (auto& l : levels) {
        os << "| " << l.str() << " |";
        for (auto& c : conds) {
            auto it = cell.find({l.str(), c.str()});
            if (it == cell.end()) os << " |";
            else os << ' ' << it->second << " |";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace bianchi
