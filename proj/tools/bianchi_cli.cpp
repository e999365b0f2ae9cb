#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bianchi/pipeline.hpp"
#include "bianchi/rigidity.hpp"

using namespace bianchi;

namespace {

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

// "4h", "30m", "90s" or plain seconds
double parse_duration(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty duration");
    double mult = 1;
    std::string num = s;
    switch (s.back()) {
        case 'h': mult = 3600; num.pop_back(); break;
        case 'm': mult = 60; num.pop_back(); break;
        case 's': num.pop_back(); break;
        default: break;
    }
    return std::stod(num) * mult;
}

std::vector<IQInt> parse_primes(const std::string& s, long d) {
    std::vector<IQInt> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(IQInt::parse(tok, d));
    return out;
}

// c0 + c1 z + ... with z = zeta_n; raw form when a square root is involved
std::string pretty(const CycScalar& x) {
    const CycField* K = x.field();
    if (K->d() != 0) return x.str();
    std::string out;
    for (int i = 0; i < K->degree(); ++i) {
        const mpq_class& c = x[i];
        if (c == 0) continue;
        std::string mag = abs(c) == 1 && i ? "" : mpq_class(abs(c)).get_str();
        std::string term = mag + (i == 0 ? "" : i == 1 ? "z" : "z^" + std::to_string(i));
        out += c < 0 ? (out.empty() ? "-" : " - ") : (out.empty() ? "" : " + ");
        out += term;
    }
    return out.empty() ? "0" : out;
}

// eigenvalue table laid out one row per
// eigensystem, one column per prime
void hecke_table(const IQInt& level, const std::string& char_s, int sign, bool new_only, std::vector<IQInt> ls,
                 long d, const std::string& json_path) {
    Modulus M{Ideal(level)};
    DirichletChar eps = char_s.empty() ? DirichletChar(&M, std::vector<int>(M.ngens(), 0)) : parse_char(char_s, &M);
    if (ls.empty())
        for (auto& l : primes_up_to(30, d))
            if (!level.divisible_by(l)) ls.push_back(l);
    std::vector<IQInt> good;
    for (auto& l : ls)
        if (!level.divisible_by(l)) good.push_back(l);
    SubspaceSpec spec;
    spec.part = sign > 0 ? Part::CuspPlus : sign < 0 ? Part::CuspMinus : Part::Cusp;
    spec.new_only = new_only;
    spec.sep = good;
    auto X = exact_operators(M, eps, spec, ls);
    std::vector<std::string> keys;
    for (auto& l : ls) keys.push_back(l.canonical().str());

    std::ostringstream md;
    md << "level " << level.str() << ", character " << eps.str() << " (conductor " << eps.conductor().str()
       << ", Galois orbit " << eps.galois_orbit().size() << "), " << part_name(spec.part) << (new_only ? " new" : "")
       << ", dimension " << X.dim << "\n";
    if (X.K && X.K->n() > 2) md << "z = exp(2 pi i / " << X.K->n() << ")\n";
    md << "\n| mult |";
    for (auto& l : ls) md << " " << l.str() << " |";
    md << "\n|---|";
    for (size_t i = 0; i < ls.size(); ++i) md << "---|";
    md << "\n";
    nlohmann::json js{{"level", level.str()}, {"character", eps.str()}, {"part", part_name(spec.part)},
                      {"new", new_only}, {"dim", X.dim}, {"systems", nlohmann::json::array()}};
    if (X.dim) {
        for (auto& e : eigensystems(X, keys)) {
            md << "| " << e.mult << " |";
            nlohmann::json row{{"mult", e.mult}, {"recognized", e.recognized}};
            for (auto& k : keys) {
                std::string v;
                if (e.recognized && e.values.count(k))
                    v = pretty(e.values.at(k));
                else if (e.images.count(k))
                    v = "mod q: " + std::to_string(e.images.at(k));
                md << " " << v << " |";
                row["values"][k] = v;
            }
            md << "\n";
            js["systems"].push_back(row);
        }
    }
    std::cout << md.str();
    if (!json_path.empty()) emit(js.dump(1) + "\n", json_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bianchi modular forms over imaginary quadratic fields"};
    app.require_subcommand(1);
    long d = -2, p = 3;

    auto* dims = app.add_subcommand("dims", "cohomology dimensions at a level");
    std::string level_s, char_s;
    int k = 0;
    dims->add_option("level", level_s, "generator, e.g. 7+w")->required();
    dims->add_option("--char", char_s, "character [e1,..]@N (default trivial)");
    dims->add_option("-k,--weight", k, "weight parameter");

    auto* cen = app.add_subcommand("census", "newforms at Gamma_0(level): J-signs, rationality, ordinarity");
    long bound = 30;
    cen->add_option("level", level_s)->required();
    cen->add_option("--bound", bound, "largest prime norm");
    cen->add_option("-p,--p", p, "prime for ordinarity");

    auto* hk = app.add_subcommand("hecke", "Hecke eigenvalue table on a space of cusp forms");
    std::string primes_s, json_out, sign_s = "+";
    bool new_only = false;
    hk->add_option("--level", level_s)->required();
    hk->add_option("--char", char_s, "character [e1,..]@N (default trivial)");
    hk->add_option("--weight", k, "only trivial weight is supported");
    hk->add_option("--primes", primes_s, "comma separated generators (default: good primes of norm <= 30)");
    hk->add_option("--sign", sign_s, "+, - or 0 for the whole cusp space");
    hk->add_flag("--new", new_only, "new subspace only");
    hk->add_option("--json", json_out);

    auto* tab = app.add_subcommand("table", "new-subspace dimensions over tame * p^r");
    int r = 2;
    bool as_json = false;
    tab->add_option("tame", level_s)->required();
    tab->add_option("-r", r);
    tab->add_option("-p,--p", p);
    tab->add_flag("--json", as_json);

    auto* pipe = app.add_subcommand("pipeline", "finiteness test for ordinary families");
    pipe->require_subcommand(1);
    auto* run = pipe->add_subcommand("run", "run one family");
    std::string family, tame_s, seed_s, out_md, out_json, budget_s = "4h";
    int seed_sign = 1;
    RunOptions opt;
    run->add_option("--family", family, "an example family name, or 'all'");
    run->add_option("--d", d);
    run->add_option("--p", p);
    run->add_option("--tame", tame_s);
    run->add_option("--seed-level", seed_s);
    run->add_option("--seed-sign", seed_sign);
    run->add_option("--depth", opt.max_depth);
    run->add_option("--budget", budget_s, "e.g. 4h, 30m, 600");
    run->add_option("--out", out_md, "Markdown report; the JSON report goes next to it");
    run->add_option("--json", out_json);
    run->add_flag("-v,--verbose", opt.verbose);
    pipe->add_subcommand("list", "list the example families");

    auto* rig = app.add_subcommand("rigidity", "p-adic power series in two variables");
    rig->require_subcommand(1);
    auto* cls = rig->add_subcommand("classify", "DIAGONAL / TORUS_TRANSLATE / NO_TRANSLATE_UP_TO_BOUNDS");
    std::string series_path;
    int D = 32, Mprec = 60, mmax = 3, budget_pts = 16;
    bool is_poly = false;
    cls->add_option("--series", series_path, "JSON {\"i,j\": coefficient}")->required();
    cls->add_option("--p", p);
    cls->add_option("--D", D);
    cls->add_option("--M", Mprec);
    cls->add_option("--mmax", mmax);
    cls->add_flag("--polynomial", is_poly, "the listed terms are all of the series");
    cls->add_option("--points", budget_pts, "torsion points sampled for the empirical bound");
    auto* det = rig->add_subcommand("detect", "search for a torus translate factor");
    det->add_option("--series", series_path, "JSON {\"i,j\": coefficient}")->required();
    det->add_option("--p", p);
    det->add_option("--D", D);
    det->add_option("--M", Mprec);
    det->add_option("--mmax", mmax);
    det->add_flag("--polynomial", is_poly, "the listed terms are all of the series");
    auto* plant = rig->add_subcommand("plant", "write xi (X+1)^N - (Y+1) as a series");
    long pN = 2, pa = 0;
    int pm = 0;
    plant->add_option("--N", pN);
    plant->add_option("--m", pm, "xi = zeta_{p^m}^a");
    plant->add_option("--a", pa);
    plant->add_option("--p", p);
    plant->add_option("--D", D);
    plant->add_option("--M", Mprec);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*dims) {
            Modulus M{Ideal(IQInt::parse(level_s, d))};
            DirichletChar eps = char_s.empty() ? DirichletChar(&M, std::vector<int>(M.ngens(), 0)) : parse_char(char_s, &M);
            CohSpace cs = h2_space(M, eps, k, k == 0);
            long eis = eisenstein_dim(eps, k);
            std::cout << "level " << M.ideal().str() << " char " << eps.str() << " k " << k << ": total " << cs.dim()
                      << " eis " << eis << " cusp " << cs.dim() - eis;
            if (cs.symbol_dim >= 0) std::cout << " symbols " << cs.symbol_dim;
            std::cout << "\n";
        } else if (*cen) {
            auto C = newform_census(IQInt::parse(level_s, d), p, bound);
            std::cout << "level " << C.level << " = " << C.factorization << "  signs (+,-) = (" << C.plus << "," << C.minus
                      << ")\n";
            for (auto& f : C.forms) {
                std::cout << (f.sign > 0 ? "+" : "-") << " degree " << f.degree << " " << ordinarity_name(f.ordinary)
                          << " (at level primes: " << ordinarity_name(f.ordinary_at_level) << ")";
                for (auto& [l, v] : f.eigenvalues) std::cout << " " << l << ":" << v;
                std::cout << "\n";
            }
        } else if (*hk) {
            if (k != 0) throw std::invalid_argument("Hecke operators are implemented in trivial weight only");
            int sign = sign_s == "+" ? 1 : sign_s == "-" ? -1 : 0;
            hecke_table(IQInt::parse(level_s, d), char_s, sign, new_only, parse_primes(primes_s, d), d, json_out);
        } else if (*tab) {
            Ideal N(IQInt::parse(level_s, d));
            DimensionTable T(N, p, r);
            std::string md = T.markdown(N, [&](const Ideal& D, const DimensionTable::Orbit& o) {
                auto [a, b] = T.p_exps(D);
                return eligible_cell(a, b, o.c1, o.c2, T.tame_part(D) == N);
            });
            if (as_json)
                std::cout << T.json().dump(1) << "\n";
            else
                std::cout << md;
        } else if (*pipe) {
            if (pipe->got_subcommand("list")) {
                for (auto& s : example_families())
                    std::cout << s.name << "  tame " << s.tame.str() << "  seed " << s.seed_level.str() << "\n";
                return 0;
            }
            opt.budget_seconds = parse_duration(budget_s);
            std::vector<FamilySpec> specs;
            if (!family.empty()) {
                for (auto& s : example_families())
                    if (family == "all" || s.name == family) specs.push_back(s);
                if (specs.empty()) throw std::invalid_argument("unknown family " + family);
            } else {
                if (tame_s.empty() || seed_s.empty()) throw std::invalid_argument("need --family or --tame and --seed-level");
                FamilySpec s;
                s.d = d;
                s.p = p;
                s.tame = IQInt::parse(tame_s, d);
                s.seed_level = IQInt::parse(seed_s, d);
                s.seed_sign = seed_sign;
                s.name = "N=" + s.tame.str();
                specs.push_back(s);
            }
            nlohmann::json all = nlohmann::json::array();
            std::string md;
            for (auto& spec : specs) {
                auto R = run_family(spec, opt);
                md += R.markdown() + "\n";
                all.push_back(R.json());
                std::cerr << spec.name << ": " << R.verdict << "\n";
            }
            emit(md, out_md);
            if (out_json.empty() && !out_md.empty()) {
                out_json = out_md;
                auto dot = out_json.rfind('.');
                if (dot != std::string::npos && out_json.find('/', dot) == std::string::npos) out_json.resize(dot);
                out_json += ".json";
            }
            if (!out_json.empty()) emit((all.size() == 1 ? all[0] : all).dump(1) + "\n", out_json);
        } else if (*rig) {
            auto load = [&] {
                std::ifstream in(series_path);
                if (!in) throw std::runtime_error("cannot read " + series_path);
                nlohmann::json j;
                in >> j;
                PSeries2 f = PSeries2::from_json(j, p, D, Mprec);
                if (is_poly) f.set_polynomial(true);
                return f;
            };
            if (det->parsed()) {
                auto r = detect_translate(load(), mmax);
                nlohmann::json out{{"xi_tried", r.xi_tried}, {"notes", r.notes}};
                out["hit"] = r.hit ? nlohmann::json(r.hit->str()) : nlohmann::json(nullptr);
                std::cout << out.dump(1) << "\n";
            } else if (cls->parsed()) {
                PSeries2 f = load();
                auto c = classify(f, mmax, budget_pts);
                auto out = c.json();
                out["D"] = D;
                out["M"] = Mprec;
                out["m_max"] = mmax;
                std::cout << out.dump(1) << "\n";
            } else {
                PSeries2 f = PSeries2::translate(p, D, Mprec, PadicInt::exact(p, pN), pm, pa);
                std::cout << f.to_json().dump(1) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
