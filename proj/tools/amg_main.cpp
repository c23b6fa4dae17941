// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner. `amg <subcommand> --config file.json [--key value ...]`
// with subcommands generate | setup | solve | sweep | verify | report.
// Every flag maps 1:1 onto a config key and wins over the file.
// Exit codes: 0 success/converged, 1 configuration error, 2 not converged.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amg/amg.hpp"

using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json default_config() {
    json strength = {{"measure", "evolution"},
                     {"drop_tol", 4.0},
                     {"evolution_steps", 2},
                     {"weighting", "spectral"}};
    json interp = {{"degree", 2},
                   {"prefilter", nullptr},
                   {"postfilter", nullptr},
                   {"energy_iters", 0},
                   {"krylov", "cg"}};
    json relax = {{"scheme", "sym_gauss_seidel"}, {"weight", 0.0}, {"sweeps", 1}};
    return json{
        {"problem",
         {{"kind", "poisson2d"},
          {"n", 8},
          {"ny", 0},
          {"eps", 1.0},
          {"psi", 0.0},
          {"nu", 0.3},
          {"young", 1.0},
          {"flow", "constant_angle"},
          {"material", "sns"}}},
        {"setup",
         {{"method", "rn"},
          {"strength", strength},
          {"interp", interp},
          {"pre_relax", relax},
          {"post_relax", relax},
          {"max_size", 20},
          {"max_levels", 25},
          {"candidate_sweeps", 4}}},
        {"solve",
         {{"tol", 1e-8}, {"max_iters", 100}, {"accel", "cg"}, {"kind", "V"}, {"nu", {1, 1}}}},
        {"output", {{"format", "csv"}, {"path", ""}}},
        {"seed", 0},
        {"sweep", json::object()},
    };
}

// ------------------------------------------------------------ enum parsing

template <typename T>
T pick(const std::string& value, std::initializer_list<std::pair<const char*, T>> table,
       const char* what) {
    for (const auto& [name, v] : table)
        if (value == name) return v;
    throw ConfigError(std::string("unknown ") + what + " '" + value + "'");
}

amg::ProblemKind kind_from(const std::string& s) {
    using K = amg::ProblemKind;
    return pick<K>(s,
                   {{"poisson1d", K::poisson1d},
                    {"poisson2d", K::poisson2d},
                    {"poisson3d", K::poisson3d},
                    {"aniso3d", K::aniso3d},
                    {"rotated_aniso2d", K::rotated_aniso2d},
                    {"recirc_flow", K::recirc_flow},
                    {"upwind_transport", K::upwind_transport},
                    {"elasticity2d", K::elasticity2d}},
                   "problem kind");
}

amg::FlowFieldId flow_from(const std::string& s) {
    using F = amg::FlowFieldId;
    return pick<F>(s, {{"constant_angle", F::constant_angle}, {"shear", F::shear}, {"curved", F::curved}},
                   "flow field");
}

amg::MaterialId material_from(const std::string& s) {
    using M = amg::MaterialId;
    return pick<M>(s, {{"constant", M::constant}, {"sns", M::sns}, {"split", M::split}}, "material");
}

amg::SetupMethod method_from(const std::string& s) {
    using M = amg::SetupMethod;
    return pick<M>(s, {{"rn", M::rn}, {"sa", M::sa}, {"cf", M::cf}}, "setup method");
}

amg::StrengthMeasure measure_from(const std::string& s) {
    using M = amg::StrengthMeasure;
    return pick<M>(s, {{"classical", M::classical}, {"symmetric", M::symmetric}, {"evolution", M::evolution}},
                   "strength measure");
}

amg::EvolutionWeighting weighting_from(const std::string& s) {
    using W = amg::EvolutionWeighting;
    return pick<W>(s, {{"spectral", W::spectral}, {"l1jacobi", W::l1jacobi}}, "evolution weighting");
}

amg::KrylovKind krylov_from(const std::string& s) {
    using K = amg::KrylovKind;
    return pick<K>(s, {{"cg", K::cg}, {"gmres", K::gmres}}, "krylov kind");
}

amg::RelaxScheme scheme_from(const std::string& s) {
    using R = amg::RelaxScheme;
    return pick<R>(s,
                   {{"jacobi", R::jacobi},
                    {"gauss_seidel", R::gauss_seidel},
                    {"sym_gauss_seidel", R::sym_gauss_seidel},
                    {"gsne", R::gsne},
                    {"block_sym_gauss_seidel", R::block_sym_gauss_seidel}},
                   "relaxation scheme");
}

amg::SolveMethod accel_from(const std::string& s) {
    using S = amg::SolveMethod;
    return pick<S>(s,
                   {{"none", S::stationary},
                    {"stationary", S::stationary},
                    {"cg", S::pcg},
                    {"pcg", S::pcg},
                    {"gmres", S::fgmres},
                    {"fgmres", S::fgmres}},
                   "acceleration");
}

amg::CycleKind cycle_from(const std::string& s) {
    using C = amg::CycleKind;
    return pick<C>(s, {{"V", C::V}, {"v", C::V}, {"W", C::W}, {"w", C::W}}, "cycle kind");
}

// ------------------------------------------------------- config -> options

std::optional<amg::FilterRule> filter_from(const json& j, const char* what) {
    if (j.is_null()) return std::nullopt;
    amg::FilterRule rule;
    if (j.is_number()) {
        rule.theta = j.get<double>();
        return rule;
    }
    if (j.is_object()) {
        if (j.contains("theta") && !j["theta"].is_null()) rule.theta = j["theta"].get<double>();
        if (j.contains("k") && !j["k"].is_null()) rule.k = j["k"].get<amg::index_t>();
        return rule;
    }
    throw ConfigError(std::string(what) + ": expected null, number, or {theta,k}");
}

amg::ProblemSpec problem_from(const json& p) {
    amg::ProblemSpec s;
    s.kind = kind_from(p.at("kind").get<std::string>());
    s.n = p.at("n").get<amg::index_t>();
    s.ny = p.at("ny").get<amg::index_t>();
    s.eps = p.at("eps").get<double>();
    s.psi = p.at("psi").get<double>();
    s.nu = p.at("nu").get<double>();
    s.young = p.at("young").get<double>();
    s.flow = flow_from(p.at("flow").get<std::string>());
    s.material = material_from(p.at("material").get<std::string>());
    return s;
}

amg::RelaxConfig relax_from(const json& r) {
    amg::RelaxConfig c;
    c.scheme = scheme_from(r.at("scheme").get<std::string>());
    c.weight = r.at("weight").get<double>();
    c.sweeps = r.at("sweeps").get<int>();
    return c;
}

amg::SetupOptions setup_from(const json& cfg) {
    const json& s = cfg.at("setup");
    amg::SetupOptions o;
    o.method = method_from(s.at("method").get<std::string>());
    const json& st = s.at("strength");
    o.strength.measure = measure_from(st.at("measure").get<std::string>());
    o.strength.drop_tol = st.at("drop_tol").get<double>();
    o.strength.evolution_steps = st.at("evolution_steps").get<int>();
    o.strength.weighting = weighting_from(st.at("weighting").get<std::string>());
    const json& in = s.at("interp");
    o.interp.degree = in.at("degree").get<amg::index_t>();
    o.interp.prefilter = filter_from(in.at("prefilter"), "prefilter");
    o.interp.postfilter = filter_from(in.at("postfilter"), "postfilter");
    o.interp.energy_iters = in.at("energy_iters").get<int>();
    o.interp.krylov = krylov_from(in.at("krylov").get<std::string>());
    o.pre_relax = relax_from(s.at("pre_relax"));
    o.post_relax = relax_from(s.at("post_relax"));
    o.max_size = s.at("max_size").get<amg::index_t>();
    o.max_levels = s.at("max_levels").get<int>();
    o.candidate_sweeps = s.at("candidate_sweeps").get<int>();

    const json& nu = cfg.at("solve").at("nu");
    if (!nu.is_array() || nu.size() != 2) throw ConfigError("solve.nu must be [pre, post]");
    o.pre_relax.sweeps = nu[0].get<int>();
    o.post_relax.sweeps = nu[1].get<int>();
    return o;
}

amg::SolveOptions solve_from(const json& cfg) {
    const json& s = cfg.at("solve");
    amg::SolveOptions o;
    o.tol = s.at("tol").get<double>();
    if (o.tol <= 0.0) throw ConfigError("solve.tol must be positive");
    o.max_iters = s.at("max_iters").get<int>();
    o.method = accel_from(s.at("accel").get<std::string>());
    o.cycle = cycle_from(s.at("kind").get<std::string>());
    return o;
}

// ------------------------------------------------------------- experiment

struct RunResult {
    json record;
    bool converged = false;
};

std::vector<double> experiment_rhs(const amg::Problem& prob, unsigned seed) {
    for (double v : prob.rhs)
        if (v != 0.0) return prob.rhs;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> b(prob.A.n_rows);
    for (auto& v : b) v = d(rng);
    return b;
}

json filter_echo(const json& f) { return f.is_object() || f.is_null() ? f : json(f.get<double>()); }

RunResult run_single(const json& cfg) {
    amg::Problem prob = amg::generate(problem_from(cfg.at("problem")));
    amg::SetupOptions so = setup_from(cfg);
    amg::Hierarchy h =
        amg::setup(prob.A, prob.B, so, prob.B_hat ? &*prob.B_hat : nullptr);
    const auto b = experiment_rhs(prob, cfg.at("seed").get<unsigned>());
    std::vector<double> x;
    amg::SolveReport rep = amg::solve(h, b, x, solve_from(cfg));

    RunResult out;
    out.converged = rep.converged;
    out.record = json{
        {"kind", cfg.at("problem").at("kind")},
        {"n", cfg.at("problem").at("n")},
        {"eps", cfg.at("problem").at("eps")},
        {"psi", cfg.at("problem").at("psi")},
        {"prefilter", filter_echo(cfg.at("setup").at("interp").at("prefilter"))},
        {"postfilter", filter_echo(cfg.at("setup").at("interp").at("postfilter"))},
        {"levels", h.n_levels()},
        {"sc", h.ledger.setup_total()},
        {"oc", rep.chi_oc},
        {"cc", rep.chi_cc},
        {"rho", rep.rho},
        {"iterations", rep.iterations},
        {"converged", rep.converged},
        {"diverged", rep.diverged},
        {"wu",
         {{"aggregation", h.ledger[amg::WorkBucket::aggregation]},
          {"candidates", h.ledger[amg::WorkBucket::candidates]},
          {"interp", h.ledger[amg::WorkBucket::interp]},
          {"rap", h.ledger[amg::WorkBucket::rap]}}},
    };
    return out;
}

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream os;
    os.precision(12);
    if (v.is_number_integer())
        os << v.get<long long>();
    else
        os << v.get<double>();
    return os.str();
}

const char* kRowHeader =
    "kind,n,eps,psi,prefilter,postfilter,levels,sc,oc,cc,rho,iterations,converged,"
    "wu_aggregation,wu_candidates,wu_interp,wu_rap";

std::string csv_row(const json& r) {
    std::ostringstream os;
    os << csv_cell(r.at("kind")) << ',' << csv_cell(r.at("n")) << ',' << csv_cell(r.at("eps"))
       << ',' << csv_cell(r.at("psi")) << ',' << csv_cell(r.at("prefilter")) << ','
       << csv_cell(r.at("postfilter")) << ',' << csv_cell(r.at("levels")) << ','
       << csv_cell(r.at("sc")) << ',' << csv_cell(r.at("oc")) << ',' << csv_cell(r.at("cc"))
       << ',' << csv_cell(r.at("rho")) << ',' << csv_cell(r.at("iterations")) << ','
       << csv_cell(r.at("converged")) << ',' << csv_cell(r.at("wu").at("aggregation")) << ','
       << csv_cell(r.at("wu").at("candidates")) << ',' << csv_cell(r.at("wu").at("interp"))
       << ',' << csv_cell(r.at("wu").at("rap"));
    return os.str();
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void emit(const json& cfg, const std::string& text) {
    const std::string path = cfg.at("output").at("path").get<std::string>();
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output path '" + path + "'");
    out << text;
}

bool format_is_json(const json& cfg) {
    const std::string f = cfg.at("output").at("format").get<std::string>();
    if (f == "json") return true;
    if (f == "csv") return false;
    throw ConfigError("output.format must be csv or json");
}

// ------------------------------------------------------------ subcommands

int cmd_generate(const json& cfg) {
    const std::string path = cfg.at("output").at("path").get<std::string>();
    if (path.empty()) throw ConfigError("generate requires output.path");
    ensure_parent_dir(path);
    amg::Problem prob = amg::generate(problem_from(cfg.at("problem")));
    amg::write_matrix_market(path, prob.A);
    {
        std::ofstream out(path + ".rhs.mtx", std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + path + ".rhs.mtx'");
        amg::write_matrix_market_array(out, prob.rhs, prob.A.n_rows, 1);
    }
    {
        std::ofstream out(path + ".b.mtx", std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + path + ".b.mtx'");
        amg::write_matrix_market_array(out, prob.B.data, prob.B.n, prob.B.k);
    }
    json side = {{"problem", cfg.at("problem")},
                 {"rows", prob.A.n_rows},
                 {"nnz", prob.A.nnz()},
                 {"block_size", prob.A.block_size},
                 {"h", prob.h},
                 {"candidates", prob.B.k},
                 {"files",
                  {{"matrix", path}, {"rhs", path + ".rhs.mtx"}, {"candidates", path + ".b.mtx"}}}};
    if (prob.B_hat) {
        std::ofstream out(path + ".bhat.mtx", std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + path + ".bhat.mtx'");
        amg::write_matrix_market_array(out, prob.B_hat->data, prob.B_hat->n, prob.B_hat->k);
        side["files"]["left_candidates"] = path + ".bhat.mtx";
    }
    std::ofstream meta(path + ".json", std::ios::binary);
    if (!meta) throw ConfigError("cannot open '" + path + ".json'");
    meta << side.dump(2) << '\n';
    std::cout << "wrote " << path << " (" << prob.A.n_rows << " rows, " << prob.A.nnz()
              << " nnz)\n";
    return 0;
}

int cmd_setup(const json& cfg) {
    amg::Problem prob = amg::generate(problem_from(cfg.at("problem")));
    amg::SetupOptions so = setup_from(cfg);
    amg::Hierarchy h = amg::setup(prob.A, prob.B, so, prob.B_hat ? &*prob.B_hat : nullptr);
    if (format_is_json(cfg))
        emit(cfg, amg::setup_report(h).dump(2) + "\n");
    else
        emit(cfg, amg::setup_report_csv(h));
    return 0;
}

int cmd_solve(const json& cfg) {
    RunResult r = run_single(cfg);
    if (format_is_json(cfg))
        emit(cfg, r.record.dump(2) + "\n");
    else
        emit(cfg, std::string(kRowHeader) + "\n" + csv_row(r.record) + "\n");
    return r.converged ? 0 : 2;
}

/// Cartesian sweep in fixed key order; rows come out in config order.
int cmd_sweep(const json& cfg) {
    const json& sw = cfg.at("sweep");
    auto axis = [&](const char* key, const json& fallback) {
        if (sw.contains(key) && sw.at(key).is_array() && !sw.at(key).empty())
            return std::vector<json>(sw.at(key).begin(), sw.at(key).end());
        return std::vector<json>{fallback};
    };
    const auto ns = axis("n", cfg.at("problem").at("n"));
    const auto epss = axis("eps", cfg.at("problem").at("eps"));
    const auto psis = axis("psi", cfg.at("problem").at("psi"));
    const auto pres = axis("prefilter", cfg.at("setup").at("interp").at("prefilter"));
    const auto posts = axis("postfilter", cfg.at("setup").at("interp").at("postfilter"));

    std::vector<json> rows;
    bool all_converged = true;
    for (const json& n : ns)
        for (const json& eps : epss)
            for (const json& psi : psis)
                for (const json& pre : pres)
                    for (const json& post : posts) {
                        json point = cfg;
                        point["problem"]["n"] = n;
                        point["problem"]["eps"] = eps;
                        point["problem"]["psi"] = psi;
                        point["setup"]["interp"]["prefilter"] = pre;
                        point["setup"]["interp"]["postfilter"] = post;
                        RunResult r = run_single(point);
                        all_converged = all_converged && r.converged;
                        rows.push_back(std::move(r.record));
                    }
    if (format_is_json(cfg)) {
        emit(cfg, json(rows).dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << kRowHeader << '\n';
        for (const json& r : rows) os << csv_row(r) << '\n';
        emit(cfg, os.str());
    }
    return all_converged ? 0 : 2;
}

int cmd_verify(const json& cfg) {
    const unsigned seed = 1u + cfg.at("seed").get<unsigned>();
    std::vector<amg::SuiteResult> results = amg::run_verification_suite(seed);
    bool all = true;
    if (format_is_json(cfg)) {
        json out = json::array();
        for (const auto& r : results) {
            out.push_back({{"name", r.name}, {"pass", r.pass}, {"worst", r.worst}, {"note", r.note}});
            all = all && r.pass;
        }
        emit(cfg, out.dump(2) + "\n");
    } else {
        std::ostringstream os;
        for (const auto& r : results) {
            os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.note << '\n';
            all = all && r.pass;
        }
        emit(cfg, os.str());
    }
    return all ? 0 : 2;
}

int cmd_report(const json& cfg) {
    amg::Problem prob = amg::generate(problem_from(cfg.at("problem")));
    amg::SetupOptions so = setup_from(cfg);
    amg::Hierarchy h = amg::setup(prob.A, prob.B, so, prob.B_hat ? &*prob.B_hat : nullptr);
    json levels = amg::setup_report(h);
    RunResult r = run_single(cfg);
    if (format_is_json(cfg)) {
        emit(cfg, json{{"setup", levels}, {"solve", r.record}}.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << amg::setup_report_csv(h) << '\n' << kRowHeader << '\n' << csv_row(r.record) << '\n';
        emit(cfg, os.str());
    }
    return r.converged ? 0 : 2;
}

// -------------------------------------------------------------- flag table

struct FlagSpec {
    const char* flag;
    const char* pointer;  // json pointer into the config
    char type;            // i integer, d double, s string, f filter, n int pair
};

const FlagSpec kFlagTable[] = {
    {"--problem.kind", "/problem/kind", 's'},
    {"--problem.n", "/problem/n", 'i'},
    {"--problem.ny", "/problem/ny", 'i'},
    {"--problem.eps", "/problem/eps", 'd'},
    {"--problem.psi", "/problem/psi", 'd'},
    {"--problem.nu", "/problem/nu", 'd'},
    {"--problem.young", "/problem/young", 'd'},
    {"--problem.flow", "/problem/flow", 's'},
    {"--problem.material", "/problem/material", 's'},
    {"--setup.method", "/setup/method", 's'},
    {"--setup.strength.measure", "/setup/strength/measure", 's'},
    {"--setup.strength.drop_tol", "/setup/strength/drop_tol", 'd'},
    {"--setup.strength.evolution_steps", "/setup/strength/evolution_steps", 'i'},
    {"--setup.strength.weighting", "/setup/strength/weighting", 's'},
    {"--setup.interp.degree", "/setup/interp/degree", 'i'},
    {"--setup.interp.prefilter", "/setup/interp/prefilter", 'f'},
    {"--setup.interp.postfilter", "/setup/interp/postfilter", 'f'},
    {"--setup.interp.energy_iters", "/setup/interp/energy_iters", 'i'},
    {"--setup.interp.krylov", "/setup/interp/krylov", 's'},
    {"--setup.pre_relax.scheme", "/setup/pre_relax/scheme", 's'},
    {"--setup.pre_relax.weight", "/setup/pre_relax/weight", 'd'},
    {"--setup.pre_relax.sweeps", "/setup/pre_relax/sweeps", 'i'},
    {"--setup.post_relax.scheme", "/setup/post_relax/scheme", 's'},
    {"--setup.post_relax.weight", "/setup/post_relax/weight", 'd'},
    {"--setup.post_relax.sweeps", "/setup/post_relax/sweeps", 'i'},
    {"--setup.max_size", "/setup/max_size", 'i'},
    {"--setup.max_levels", "/setup/max_levels", 'i'},
    {"--setup.candidate_sweeps", "/setup/candidate_sweeps", 'i'},
    {"--solve.tol", "/solve/tol", 'd'},
    {"--solve.max_iters", "/solve/max_iters", 'i'},
    {"--solve.accel", "/solve/accel", 's'},
    {"--solve.kind", "/solve/kind", 's'},
    {"--solve.nu", "/solve/nu", 'n'},
    {"--output.format", "/output/format", 's'},
    {"--output.path", "/output/path", 's'},
    {"--seed", "/seed", 'i'},
};

void apply_flag(json& cfg, const FlagSpec& spec, const std::string& value) {
    const json::json_pointer ptr(spec.pointer);
    try {
        switch (spec.type) {
            case 'i': cfg[ptr] = std::stoll(value); break;
            case 'd': cfg[ptr] = std::stod(value); break;
            case 's': cfg[ptr] = value; break;
            case 'f':
                if (value == "none" || value == "off" || value == "null")
                    cfg[ptr] = nullptr;
                else
                    cfg[ptr] = std::stod(value);
                break;
            case 'n': {
                const auto comma = value.find(',');
                if (comma == std::string::npos) throw ConfigError("expected pre,post");
                cfg[ptr] = {std::stoi(value.substr(0, comma)), std::stoi(value.substr(comma + 1))};
                break;
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(std::string("bad value '") + value + "' for " + spec.flag);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"root-node AMG experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::pair<const FlagSpec*, std::string>> overrides;
    std::vector<CLI::App*> subs;
    for (const char* name : {"generate", "setup", "solve", "sweep", "verify", "report"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file");
        for (const FlagSpec& spec : kFlagTable) {
            sub->add_option_function<std::string>(
                spec.flag,
                [&overrides, &spec](const std::string& v) { overrides.push_back({&spec, v}); });
        }
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        json cfg = default_config();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config '" + config_path + "'");
            json user;
            try {
                user = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config parse error: ") + e.what());
            }
            cfg.merge_patch(user);
        }
        for (const auto& [spec, value] : overrides) apply_flag(cfg, *spec, value);

        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "generate") return cmd_generate(cfg);
        if (sub == "setup") return cmd_setup(cfg);
        if (sub == "solve") return cmd_solve(cfg);
        if (sub == "sweep") return cmd_sweep(cfg);
        if (sub == "verify") return cmd_verify(cfg);
        if (sub == "report") return cmd_report(cfg);
        throw ConfigError("unknown subcommand '" + sub + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
