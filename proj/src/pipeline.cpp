#include "bianchi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bianchi {

namespace {

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string sup(int e) {
    static const char* d[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
    if (e == 1) return "";
    std::string s;
    for (char c : std::to_string(e)) s += d[c - '0'];
    return s;
}

std::string key_of(const IQInt& l) { return l.canonical().str(); }

std::vector<IQInt> good_primes(const Ideal& avoid, long bound, long d) {
    std::vector<IQInt> out;
    for (auto& l : primes_up_to(bound, d))
        if (!avoid.gen.divisible_by(l)) out.push_back(l);
    return out;
}

long ipow(long b, int e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

nlohmann::json cong_json(const CongruenceResult& c) {
    nlohmann::json w = nlohmann::json::array();
    for (auto& [k, v] : c.witness) w.push_back({k, v});
    return {{"possible", c.possible},       {"prefilter_eliminated", c.prefilter_eliminated},
            {"lattice_rank", c.lattice_rank}, {"reduced_dim", c.reduced_dim},
            {"ordinary_dim", c.ordinary_dim}, {"witness", w},
            {"reduction", c.reduction},     {"notes", c.notes}};
}

CongruenceResult cong_from_json(const nlohmann::json& j) {
    CongruenceResult c;
    c.possible = j["possible"];
    c.prefilter_eliminated = j["prefilter_eliminated"];
    c.lattice_rank = j["lattice_rank"];
    c.reduced_dim = j["reduced_dim"];
    c.ordinary_dim = j["ordinary_dim"];
    for (auto& w : j["witness"]) c.witness.push_back({w[0].get<std::string>(), w[1].get<int>()});
    c.reduction = j["reduction"];
    c.notes = j["notes"].get<std::vector<std::string>>();
    return c;
}

nlohmann::json dims_json(const CellDims& d) {
    return {{"total", d.total}, {"eis", d.eis},           {"cusp", d.cusp},         {"plus", d.plus},
            {"minus", d.minus}, {"new", d.new_full},      {"new_plus", d.new_plus}, {"new_minus", d.new_minus},
            {"odd", d.odd}};
}

nlohmann::json cand_json(const Candidate& c) {
    return {{"level", c.level},   {"label", c.level_label}, {"conductor", c.cond_label}, {"character", c.chi},
            {"orbit", c.orbit},   {"a", c.a},               {"b", c.b},                  {"c1", c.c1},
            {"c2", c.c2},         {"depth", c.depth},       {"dims", dims_json(c.dims)}, {"space_dim", c.space_dim},
            {"status", c.status}, {"congruence", cong_json(c.cong)}, {"notes", c.notes}};
}

}  // namespace

std::vector<FamilySpec> example_families() {
    std::vector<FamilySpec> out;
    auto add = [&](const char* name, IQInt tame, IQInt seed) {
        FamilySpec s;
        s.name = name;
        s.tame = tame;
        s.seed_level = seed;
        out.push_back(s);
    };
    add("N=3-2w", IQInt(3, -2), IQInt(7, 1));
    add("N=3-w", IQInt(3, -1), IQInt(9, -3));
    add("N=6+w", IQInt(6, 1), IQInt(4, 7));
    add("N=2w", IQInt(0, 2), IQInt(0, 6));
    return out;
}

WeightProbe weight_probe(const Ideal& N, const std::vector<int>& ks) {
    WeightProbe w;
    Modulus M(N);
    DirichletChar triv(&M, std::vector<int>(M.ngens(), 0));
    for (int k : ks) {
        CohSpace cs = h2_space(M, triv, k, k == 0);
        long cusp = cs.dim() - eisenstein_dim(triv, k);
        w.cusp_dims.push_back({k, cusp});
        if (cusp == 0 && !w.zero_at) w.zero_at = k;
    }
    return w;
}

bool eligible_cell(int a, int b, int c1, int c2, bool tame_matches, int k) {
    if (!tame_matches) return false;
    if (a == 0 && b == 0) return false;
    return ordinary_allowed(a, c1, k) && ordinary_allowed(b, c2, k);
}

// ---------------------------------------------------------------------------

DimensionTable::DimensionTable(const Ideal& tame, long p, int r) : tame_(tame), p_(p), r_(r) {
    long d = tame.gen.d();
    pp_ = primes_over(p, d);
    if (pp_.size() != 2) throw std::invalid_argument("p does not split");
    if (tame.gen.divisible_by(pp_[0]) || tame.gen.divisible_by(pp_[1])) throw std::invalid_argument("tame level divisible by p");
    IQInt P(ipow(p, r), 0, d);
    L_ = Ideal(tame.gen * P);
    P_ = std::make_unique<Modulus>(Ideal(P));
    ML_ = std::make_unique<Modulus>(L_);
    std::set<std::string> seen;
    for (auto& chi : P_->characters()) {
        if (seen.count(chi.str())) continue;
        auto orb = chi.galois_orbit();
        for (auto& c : orb) seen.insert(c.str());
        Orbit o;
        o.chi = chi;
        o.size = (int)orb.size();
        o.conductor = chi.conductor();
        o.c1 = o.conductor.valuation(pp_[0]);
        o.c2 = o.conductor.valuation(pp_[1]);
        orbits_.push_back(o);
    }
}

DimensionTable::~DimensionTable() = default;

const Modulus& DimensionTable::modulus(const Ideal& D) {
    auto& m = mods_[D.str()];
    if (!m) m = std::make_unique<Modulus>(D);
    return *m;
}

DirichletChar DimensionTable::char_at(const Ideal& D, const Orbit& o) {
    DirichletChar big = induce(o.chi, *ML_);
    auto r = restrict_char(big, modulus(D));
    if (!r) throw std::invalid_argument("conductor does not divide " + D.str());
    return *r;
}

Ideal DimensionTable::tame_part(const Ideal& D) const {
    IQInt g = D.gen;
    for (auto& q : pp_)
        while (g.divisible_by(q)) g = g.div_exact(q);
    return Ideal(g);
}

std::pair<int, int> DimensionTable::p_exps(const Ideal& D) const { return {D.valuation(pp_[0]), D.valuation(pp_[1])}; }

std::string DimensionTable::p_label(int a, int b) const {
    int m = std::min(a, b);
    std::string s;
    if (m > 0) s += std::to_string(ipow(p_, m));
    if (a > m) s += "π" + sup(a - m);
    if (b > m) s += "π̄" + sup(b - m);
    return s.empty() ? "1" : s;
}

std::string DimensionTable::level_label(const Ideal& D, const Ideal& tame) const {
    Ideal t = tame_part(D);
    auto [a, b] = p_exps(D);
    std::string tl = t == tame ? "N" : (t.is_unit() ? "" : t.str());
    if (a == 0 && b == 0) return "Γ₀(" + (tl.empty() ? std::string("1") : tl) + ")";
    if (tl.empty()) return "Γ₁(" + p_label(a, b) + ")";
    return "Γ₀(" + tl + ")∩Γ₁(" + p_label(a, b) + ")";
}

const CellDims& DimensionTable::dims(const Ideal& D, const Orbit& o) {
    std::string key = D.str() + "|" + o.chi.str();
    auto it = dims_.find(key);
    if (it != dims_.end()) return it->second;
    if (!o.conductor.divides(D)) throw std::invalid_argument("conductor does not divide the level");
    for (auto& M : D.divisors())
        if (!(M == D) && o.conductor.divides(M)) dims(M, o);

    const Modulus& MD = modulus(D);
    DirichletChar eps = char_at(D, o);
    CellDims c;
    std::string ckey = primitive_key(eps);
    if (eps.sign() == -1) {
        c.odd = true;
    } else {
        CohSpace cs = h2_space(MD, eps, 0, false);
        c.total = cs.dim();
        c.eis = eisenstein_dim(eps, 0);
        ProjLine P(MD);
        Embedding E = make_embedding(embedding_primes(1, eps.order(), 0)[0], eps.order(), 0);
        HeckeSpace S(P, eps, E);
        if (S.dim() != c.total)
            throw std::runtime_error("symbol and cellular dimensions differ at " + D.str() + " " + eps.str());
        c.cusp = S.part(Part::Cusp).c;
        c.plus = S.part(Part::CuspPlus).c;
        c.minus = S.part(Part::CuspMinus).c;
        if (c.cusp != c.total - c.eis)
            throw std::runtime_error("cuspidal dimension disagrees with the Eisenstein count at " + D.str() + " " + eps.str());
    }
    c.new_full = ledger_.update_cusp(D, o.conductor, ckey, 0, 0, c.cusp, c.eis, o.size).new_;
    c.new_plus = ledger_.update_cusp(D, o.conductor, ckey, 0, 1, c.plus, 0, o.size).new_;
    c.new_minus = ledger_.update_cusp(D, o.conductor, ckey, 0, -1, c.minus, 0, o.size).new_;
    return dims_[key] = c;
}

std::string DimensionTable::markdown(const Ideal& tame, const std::function<bool(const Ideal&, const Orbit&)>& bold) {
    struct Col {
        int a, b;
        std::string label;
    };
    std::vector<Col> cols;
    for (int a = 0; a <= r_; ++a)
        for (int b = 0; b <= r_; ++b) cols.push_back({a, b, p_label(a, b)});
    auto ckey = [](const Col& c) { return std::make_tuple(c.a + c.b, -std::abs(c.a - c.b), -c.a); };
    std::sort(cols.begin(), cols.end(), [&](const Col& x, const Col& y) { return ckey(x) < ckey(y); });

    struct Row {
        Ideal D;
        int a, b;
        long tn;
    };
    std::vector<Row> rows;
    for (auto& D : L_.divisors()) {
        auto [a, b] = p_exps(D);
        rows.push_back({D, a, b, tame_part(D).norm_long()});
    }
    std::sort(rows.begin(), rows.end(), [&](const Row& x, const Row& y) {
        auto kx = std::make_tuple(x.a + x.b, -std::abs(x.a - x.b), -x.a, x.tn);
        auto ky = std::make_tuple(y.a + y.b, -std::abs(y.a - y.b), -y.a, y.tn);
        return kx < ky;
    });

    std::ostringstream os;
    os << "| level \\ conductor |";
    for (auto& c : cols) os << ' ' << c.label << " |";
    os << "\n|---|";
    for (size_t i = 0; i < cols.size(); ++i) os << "---|";
    os << '\n';
    for (auto& R : rows) {
        std::vector<std::string> cells;
        bool any = false;
        for (auto& c : cols) {
            if (c.a > R.a || c.b > R.b) {
                cells.push_back("-");
                continue;
            }
            long v = 0;
            bool b = false;
            for (auto& o : orbits_) {
                if (o.c1 != c.a || o.c2 != c.b) continue;
                const CellDims& d = dims(R.D, o);
                v += d.new_full * o.size;
                if (d.new_full > 0 && bold(R.D, o)) b = true;
            }
            if (v) any = true;
            cells.push_back(b ? "**" + std::to_string(v) + "**" : std::to_string(v));
        }
        if (!any) continue;
        os << "| " << level_label(R.D, tame) << " |";
        for (auto& s : cells) os << ' ' << s << " |";
        os << '\n';
    }
    return os.str();
}

nlohmann::json DimensionTable::json() {
    nlohmann::json out = nlohmann::json::array();
    for (auto& r : ledger_.rows())
        out.push_back({{"level", r.level.str()}, {"conductor", r.conductor.str()}, {"character", r.char_key},
                       {"sign", r.sign}, {"mult", r.mult}, {"cusp", r.cusp}, {"eis", r.eis}, {"old", r.old},
                       {"new", r.new_}});
    return out;
}

// ---------------------------------------------------------------------------

SeedData seed_data(const FamilySpec& spec) {
    SeedData s;
    Ideal S(spec.seed_level);
    s.level = S.str();
    Modulus M(S);
    DirichletChar triv(&M, std::vector<int>(M.ngens(), 0));
    auto pp = primes_over(spec.p, spec.d);
    auto good = good_primes(Ideal(spec.tame * IQInt(spec.p, 0, spec.d)), spec.prime_bound, spec.d);
    std::vector<IQInt> ls = good;
    ls.insert(ls.end(), pp.begin(), pp.end());
    SubspaceSpec sub;
    sub.part = spec.seed_sign > 0 ? Part::CuspPlus : Part::CuspMinus;
    sub.new_only = true;
    sub.sep = good;
    auto X = exact_operators(M, triv, sub, ls);
    s.dim = X.dim;
    if (X.dim != 1) return s;
    for (auto& l : good) {
        const CycScalar& v = X.ops.at(key_of(l)).at(0, 0);
        if (!v.is_rational() || v[0].get_den() != 1) throw std::runtime_error("seed eigenvalue is not a rational integer");
        s.a[key_of(l)] = v[0].get_num().get_si();
    }
    std::vector<PrimeAboveP> loc;
    for (auto& P : pp) {
        CycScalar v = X.ops.at(key_of(P)).at(0, 0);
        s.local[key_of(P)] = v.pretty();
        loc.push_back({P, S.valuation(P), 0, v});
    }
    s.ordinarity = ordinarity(loc, choose_reduction(X.K, spec.p), 0);
    return s;
}

DepthResult depth_scan(const FamilySpec& spec, const SeedData& seed, int depth, double deadline, bool verbose) {
    DepthResult res;
    res.depth = depth;
    Ideal tame(spec.tame);
    DimensionTable T(tame, spec.p, depth + 1);
    const auto& pp = T.primes_above_p();
    std::vector<IQInt> good;
    for (auto& l : good_primes(Ideal(spec.tame * IQInt(spec.p, 0, spec.d)), spec.prime_bound, spec.d)) good.push_back(l);
    std::map<std::string, long> target;
    for (auto& l : good) target[key_of(l)] = seed.a.at(key_of(l));
    std::vector<std::string> ord_keys;
    for (auto& P : pp) ord_keys.push_back(key_of(P));
    Part part = spec.seed_sign > 0 ? Part::CuspPlus : Part::CuspMinus;
    Ideal seed_level(spec.seed_level);

    std::vector<Ideal> levels;
    for (auto& D : T.top().divisors())
        if (T.tame_part(D) == tame) levels.push_back(D);
    std::sort(levels.begin(), levels.end(), [](const Ideal& x, const Ideal& y) { return x.norm() < y.norm(); });

    for (auto& D : levels) {
        auto [a, b] = T.p_exps(D);
        for (auto& o : T.orbits()) {
            if (!o.conductor.divides(D)) continue;
            if (!eligible_cell(a, b, o.c1, o.c2, true)) continue;
            int cd = std::max(o.c1, o.c2) - 1;
            if (cd != depth && !(depth == 1 && cd <= 0)) continue;
            Candidate c;
            c.level = D.str();
            c.level_label = T.level_label(D, tame);
            c.cond_label = T.p_label(o.c1, o.c2);
            c.chi = o.chi.str();
            c.orbit = o.size;
            c.a = a;
            c.b = b;
            c.c1 = o.c1;
            c.c2 = o.c2;
            c.depth = std::max(cd, 0);
            if (now_seconds() > deadline) {
                c.status = "not computed (budget)";
                res.complete = false;
                res.candidates.push_back(c);
                continue;
            }
            c.dims = T.dims(D, o);
            if (c.dims.odd) continue;
            c.space_dim = part == Part::CuspPlus ? c.dims.new_plus : c.dims.new_minus;
            long other = part == Part::CuspPlus ? c.dims.new_minus : c.dims.new_plus;
            if (c.dims.new_full == 0) continue;
            if (c.space_dim == 0) {
                c.status = "eliminated: J-sign";
                c.notes.push_back(std::to_string(other) + " newform dimensions, all of the opposite sign");
            } else if (c.depth == 0 && D == seed_level && o.conductor.is_unit() && c.space_dim == 1) {
                c.status = "seed";
            } else {
                std::string ck = std::string(kCodeVersion) + "|" + tame.str() + "|" + D.str() + "|" + c.chi + "|" +
                                 std::to_string(spec.seed_sign) + "|" + std::to_string(spec.prime_bound);
                for (auto& [k, v] : target) ck += "|" + k + "=" + std::to_string(v);
                if (auto j = cache_get("candidate", ck)) {
                    c.cong = cong_from_json((*j)["congruence"]);
                    c.notes = (*j)["notes"].get<std::vector<std::string>>();
                } else {
                    if (verbose) std::cerr << "  candidate " << c.level_label << " cond " << c.cond_label << " dim " << c.space_dim << "\n";
                    const Modulus& MD = T.modulus(D);
                    DirichletChar eps = T.char_at(D, o);
                    std::vector<IQInt> ls = good;
                    ls.insert(ls.end(), pp.begin(), pp.end());
                    SubspaceSpec sub;
                    sub.part = part;
                    sub.new_only = true;
                    sub.sep = good;
                    auto X = exact_operators(MD, eps, sub, ls);
                    if (X.dim != c.space_dim) throw std::runtime_error("new subspace dimension disagrees with the ledger at " + D.str());
                    c.cong = congruence_eliminate(X, target, (u64)spec.p, ord_keys);
                    c.notes.push_back("exact operators over Q(zeta_" + std::to_string(X.K->n()) + ") from " +
                                      std::to_string(X.primes_used) + " primes");
                    cache_put("candidate", ck, {{"congruence", cong_json(c.cong)}, {"notes", c.notes}});
                }
                bool is_seed_cell = D == seed_level && o.conductor.is_unit();
                if (c.cong.prefilter_eliminated)
                    c.status = "eliminated: char poly mod p";
                else if (!c.cong.possible)
                    c.status = "eliminated: joint kernel";
                else if (is_seed_cell && c.cong.ordinary_dim <= 1)
                    c.status = "seed only";
                else
                    c.status = "survivor";
            }
            if (c.depth == depth && c.status == "survivor") ++res.survivors;
            res.candidates.push_back(c);
        }
    }
    if (depth == 1) {
        res.table = T.markdown(tame, [&](const Ideal& D, const DimensionTable::Orbit& o) {
            auto [a, b] = T.p_exps(D);
            return eligible_cell(a, b, o.c1, o.c2, T.tame_part(D) == tame);
        });
    }
    return res;
}

FinitenessReport run_family(const FamilySpec& spec, const RunOptions& opt) {
    FinitenessReport R;
    R.spec = spec;
    double deadline = now_seconds() + opt.budget_seconds;
    R.probe = weight_probe(Ideal(spec.tame), spec.probe_weights);
    if (!R.probe.zero_at) {
        R.verdict = "DIAGONAL_SUSPECT";
        R.notes.push_back("every probed weight has cusp forms at Gamma_0(N); the diagonal cannot be excluded");
        R.seed = seed_data(spec);
        return R;
    }
    R.seed = seed_data(spec);
    if (R.seed.dim != 1) {
        R.verdict = "INCONCLUSIVE(0)";
        R.notes.push_back("seed part has dimension " + std::to_string(R.seed.dim) + ", expected 1");
        return R;
    }
    if (R.seed.ordinarity.verdict != Ordinarity::Ordinary) R.notes.push_back("seed is not ordinary at p");
    for (int i = 1; i <= opt.max_depth; ++i) {
        if (opt.verbose) std::cerr << spec.name << ": depth " << i << "\n";
        R.depths.push_back(depth_scan(spec, R.seed, i, deadline, opt.verbose));
        const DepthResult& d = R.depths.back();
        if (!d.complete) {
            R.verdict = "INCONCLUSIVE(" + std::to_string(i) + ")";
            R.verdict_depth = i;
            R.notes.push_back("budget exhausted at depth " + std::to_string(i));
            return R;
        }
        if (d.survivors == 0) {
            R.verdict = "FINITE_CLASSICAL_POINTS";
            R.verdict_depth = i;
            return R;
        }
    }
    R.verdict = "INCONCLUSIVE(" + std::to_string(opt.max_depth) + ")";
    R.verdict_depth = opt.max_depth;
    R.notes.push_back("ordinary eigensystems congruent to the seed remain at every computed depth");
    return R;
}

std::string FinitenessReport::markdown() const {
    std::ostringstream os;
    os << "# Family " << spec.name << "\n\n";
    os << "- field Q(sqrt " << spec.d << "), p = " << spec.p << ", tame level " << spec.tame.str() << "\n";
    os << "- seed: level " << spec.seed_level.str() << ", J-sign " << (spec.seed_sign > 0 ? "+" : "-") << "\n";
    os << "- verdict: **" << verdict << "**\n\n";
    os << "## Weight probe\n\n| k | cusp dim at Γ₀(N) |\n|---|---|\n";
    for (auto& [k, v] : probe.cusp_dims) os << "| " << k << " | " << v << " |\n";
    os << "\n## Seed\n\n";
    os << "- new dimension in its J-part: " << seed.dim << "\n";
    if (!seed.a.empty()) {
        os << "- eigenvalues:";
        for (auto& [k, v] : seed.a) os << " a(" << k << ")=" << v;
        os << "\n";
    }
    for (auto& [k, v] : seed.local) os << "- eigenvalue above p at " << k << ": " << v << "\n";
    os << "- ordinarity: " << ordinarity_name(seed.ordinarity.verdict) << "\n";
    for (auto& d : depths) {
        os << "\n## Depth " << d.depth << "\n\n";
        if (!d.table.empty()) os << "New-subspace dimensions (bold: ordinary forms allowed by the local classification)\n\n" << d.table << "\n";
        os << "| level | conductor | orbit | new (+,-) | candidate dim | status | witness |\n|---|---|---|---|---|---|---|\n";
        for (auto& c : d.candidates) {
            std::string w;
            for (auto& [k, v] : c.cong.witness) w += k + ":" + std::to_string(v) + " ";
            if (c.cong.prefilter_eliminated)
                for (auto& n : c.cong.notes) w += n + " ";
            os << "| " << c.level_label << " | " << c.cond_label << " | " << c.orbit << " | " << c.dims.new_plus << ","
               << c.dims.new_minus << " | " << c.space_dim << " | " << c.status << " | " << w << "|\n";
        }
        os << "\nsurvivors at depth " << d.depth << ": " << d.survivors << "\n";
    }
    if (!notes.empty()) {
        os << "\n## Notes\n\n";
        for (auto& n : notes) os << "- " << n << "\n";
    }
    return os.str();
}

nlohmann::json FinitenessReport::json() const {
    nlohmann::json j;
    j["family"] = spec.name;
    j["d"] = spec.d;
    j["p"] = spec.p;
    j["tame"] = spec.tame.str();
    j["seed_level"] = spec.seed_level.str();
    j["seed_sign"] = spec.seed_sign;
    j["verdict"] = verdict;
    j["verdict_depth"] = verdict_depth;
    nlohmann::json pr = nlohmann::json::array();
    for (auto& [k, v] : probe.cusp_dims) pr.push_back({{"k", k}, {"cusp_dim", v}});
    j["weight_probe"] = pr;
    j["seed"] = {{"dim", seed.dim}, {"a", seed.a}, {"local", seed.local},
                 {"ordinarity", ordinarity_name(seed.ordinarity.verdict)}, {"notes", seed.ordinarity.notes}};
    nlohmann::json ds = nlohmann::json::array();
    for (auto& d : depths) {
        nlohmann::json cs = nlohmann::json::array();
        for (auto& c : d.candidates) cs.push_back(cand_json(c));
        ds.push_back({{"depth", d.depth}, {"survivors", d.survivors}, {"complete", d.complete}, {"candidates", cs}, {"table", d.table}});
    }
    j["depths"] = ds;
    j["notes"] = notes;
    j["code_version"] = kCodeVersion;
    return j;
}

// ---------------------------------------------------------------------------

LevelCensus newform_census(const IQInt& level, long p, long prime_bound) {
    LevelCensus C;
    Ideal I(level);
    C.level = I.str();
    for (auto& [q, e] : I.factors) C.factorization += (C.factorization.empty() ? "" : "·") + ("(" + q.str() + ")") + (e > 1 ? "^" + std::to_string(e) : "");
    Modulus M(I);
    DirichletChar triv(&M, std::vector<int>(M.ngens(), 0));
    long d = level.d();
    auto pp = primes_over(p, d);
    auto good = good_primes(Ideal(level * IQInt(p, 0, d)), prime_bound, d);
    std::vector<IQInt> ls = good;
    ls.insert(ls.end(), pp.begin(), pp.end());
    std::vector<std::string> keys;
    for (auto& l : ls) keys.push_back(key_of(l));
    for (int sign : {1, -1}) {
        SubspaceSpec sub;
        sub.part = sign > 0 ? Part::CuspPlus : Part::CuspMinus;
        sub.new_only = true;
        sub.sep = good;
        auto X = exact_operators(M, triv, sub, ls);
        (sign > 0 ? C.plus : C.minus) = X.dim;
        ModpReduction red = choose_reduction(X.K, p);
        for (auto& e : eigensystems(X, keys)) {
            int copies = e.split && e.recognized ? e.mult : 1;
            for (int t = 0; t < copies; ++t) {
                NewformInfo f;
                f.sign = sign;
                f.rational = e.split && e.recognized;
                f.degree = f.rational ? 1 : e.mult;
                for (auto& [k, v] : e.values) f.eigenvalues[k] = v.pretty();
                std::vector<PrimeAboveP> loc;
                for (auto& P : pp) {
                    PrimeAboveP a{P, I.valuation(P), 0, std::nullopt};
                    if (f.rational) a.eigenvalue = e.values.at(key_of(P));
                    loc.push_back(a);
                }
                f.ordinary = ordinarity(loc, red, 0).verdict;
                std::vector<PrimeAboveP> at_level;
                for (auto& a : loc)
                    if (a.level_exp > 0) at_level.push_back(a);
                f.ordinary_at_level = at_level.empty() ? Ordinarity::Undetermined : ordinarity(at_level, red, 0).verdict;
                C.forms.push_back(f);
            }
        }
    }
    return C;
}

}  // namespace bianchi
