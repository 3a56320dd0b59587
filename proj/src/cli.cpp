#include "chenhopf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "chenhopf/orbit_finder.hpp"

namespace chenhopf::cli {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    double a = -1.0;
    double b = -1.0;
    std::optional<double> c;
    double d = 2.0;
    double r = 1.0;
    double epsilon = 0.01;
    std::string epsilons = "0.005,0.01,0.02,0.04";
    double tol = 1e-11;
    std::size_t nodes = kDefaultQuadratureNodes;
    std::uint64_t seed = 42;
    bool json_out = false;
    std::string out;
    std::string frame = "scaled";
    int branch = 1;
    std::size_t samples = 200;
    std::string method = "both";
    std::string point = "0,0,0,0";
    bool force_fail = false;

    [[nodiscard]] ChenParams params() const { return {a, b, c.value_or(a), d, r}; }
};

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

json manifest(const std::string& command, const Options& o) {
    const ChenParams p = o.params();
    json m;
    m["tool"] = "chenhopf";
    m["version"] = kToolVersion;
    m["command"] = command;
    m["parameters"] = {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"r", p.r}};
    m["epsilon"] = o.epsilon;
    m["epsilons"] = o.epsilons;
    m["tol"] = o.tol;
    m["nodes"] = o.nodes;
    m["seed"] = o.seed;
    m["method"] = o.method;
    m["point"] = o.point;
    m["branch"] = o.branch;
    m["samples"] = o.samples;
    m["frame"] = o.frame;
    m["timestamp"] = timestamp_utc();
    return m;
}

json to_json(const Complex& z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const QuarticSpectrum& s) {
    json arr = json::array();
    for (const auto& v : s.values) arr.push_back(to_json(v));
    return arr;
}

json to_json(const State4& s) { return json::array({s.x, s.y, s.z, s.w}); }

json to_json(const ConditionReport& c) {
    return {{"holds_c_equals_a", c.holds_c_equals_a},
            {"value_a_times_a_plus_d", c.value_a_times_a_plus_d},
            {"holds_negative", c.holds_negative},
            {"value_b_ad_r", c.value_b_ad_r},
            {"holds_b_ad_r_negative", c.holds_b_ad_r_negative},
            {"d_nonzero", c.d_nonzero},
            {"overall", c.overall},
            {"failures", c.failures()}};
}

json to_json(const AveragedZero& z) {
    return {{"point", to_json(z.point)},
            {"residual", z.residual},
            {"det_jacobian", z.det_jacobian},
            {"spectrum", to_json(z.spectrum)},
            {"simple", z.simple},
            {"all_negative_real_parts", z.all_negative_real_parts},
            {"converged", z.converged},
            {"iterations", z.iterations}};
}

json to_json(const PeriodicOrbit& o) {
    return {{"branch", o.branch},
            {"frame", to_string(o.frame)},
            {"epsilon", o.epsilon},
            {"initial_state", to_json(o.initial_state)},
            {"period", o.period},
            {"residual", o.residual},
            {"multipliers", to_json(o.multipliers)}};
}

json to_json(const ShootReport& r) {
    return {{"status", to_string(r.status)},
            {"state", to_json(r.state)},
            {"period", r.period},
            {"residual", r.residual},
            {"phase_residual", r.phase_residual},
            {"field_norm", r.field_norm},
            {"iterations", r.iterations},
            {"message", r.message}};
}

void flatten(const json& j, const std::string& prefix, std::ostream& os) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
    } else if (j.is_number_float()) {
        os << prefix << ": " << format_double(j.get<double>()) << '\n';
    } else if (j.is_string()) {
        os << prefix << ": " << j.get<std::string>() << '\n';
    } else {
        os << prefix << ": " << j.dump() << '\n';
    }
}

void emit(const json& doc, const Options& o, std::ostream& os) {
    if (o.json_out)
        os << doc.dump(2) << '\n';
    else
        flatten(doc, "", os);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw InputError(std::string("malformed ") + what + ": '" + text + "'");
        values.push_back(v);
        pos = comma + 1;
    }
    return values;
}

State4 parse_point(const std::string& text) {
    const std::vector<double> v = parse_list(text, "--point");
    if (v.size() != 4) throw InputError("--point needs four comma-separated values");
    const State4 s{v[0], v[1], v[2], v[3]};
    if (!s.finite()) throw InputError("--point must be finite");
    return s;
}

/// c = a and the elliptic case; the sign of b(a+d)r is not needed here.
RegimeConfig regime(const Options& o, double epsilon) {
    const ChenParams p = o.params();
    const ConditionReport c = check_zero_hopf_conditions(p);
    std::string failed;
    if (!c.holds_c_equals_a) failed += "c = a fails; ";
    if (!c.d_nonzero) failed += "d != 0 fails; ";
    if (!c.holds_negative) failed += "a(a+d) < 0 fails; ";
    if (!failed.empty()) throw HypothesisError("inadmissible regime: " + failed.substr(0, failed.size() - 2));
    return RegimeConfig::from_params(p, epsilon);
}

/// All zero-Hopf hypotheses.
RegimeConfig admissible(const Options& o, double epsilon) {
    const ConditionReport c = check_zero_hopf_conditions(o.params());
    if (!c.overall) throw HypothesisError("zero-Hopf hypotheses violated: " + c.failures());
    return RegimeConfig::from_params(o.params(), epsilon);
}

ShootOptions shoot_options(const Options& o) {
    if (!(o.tol > 0.0)) throw InputError("--tol must be positive");
    ShootOptions s;
    s.newton_tol = o.tol;
    return s;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot open output file '" + path + "'");
    return f;
}

int cmd_check(const Options& o, std::ostream& out) {
    const ConditionReport c = check_zero_hopf_conditions(o.params());
    json doc;
    doc["manifest"] = manifest("check", o);
    doc["conditions"] = to_json(c);
    emit(doc, o, out);
    return c.overall ? kOk : kHypothesis;
}

int cmd_spectrum(const Options& o, std::ostream& out) {
    const ChenParams p = o.params();
    const QuarticSpectrum closed = origin_eigenvalues(p);
    const QuarticSpectrum numeric = eig4(jacobian_full(p, State4{}));
    json doc;
    doc["manifest"] = manifest("spectrum", o);
    json coeffs = json::array();
    for (double v : origin_char_poly(p)) coeffs.push_back(v);
    doc["char_poly_ascending"] = coeffs;
    doc["lambda1_r"] = p.r;
    doc["lambda2_minus_b"] = -p.b;
    doc["closed_form"] = to_json(closed);
    doc["eig4"] = to_json(numeric);
    doc["max_deviation"] = spectrum_distance(closed, numeric);
    emit(doc, o, out);
    return kOk;
}

int cmd_favg(const Options& o, std::ostream& out) {
    if (o.nodes < 8) throw InputError("--nodes must be at least 8");
    const State4 u = parse_point(o.point);
    const RegimeConfig cfg = regime(o, 0.0);
    json doc;
    doc["manifest"] = manifest("favg", o);
    doc["point"] = to_json(u);
    std::optional<Vec4> closed, quad;
    if (o.method != "quadrature") {
        closed = bifurcation_f_closed(cfg, u).vec();
        doc["closed"] = to_json(State4::from(*closed));
    }
    if (o.method != "closed") {
        quad = bifurcation_f_quadrature(cfg, u, o.nodes).vec();
        doc["quadrature"] = to_json(State4::from(*quad));
    }
    if (closed && quad) doc["discrepancy"] = norm_inf(*closed - *quad);
    emit(doc, o, out);
    return kOk;
}

int cmd_zeros(const Options& o, std::ostream& out) {
    const RegimeConfig cfg = admissible(o, 0.0);
    const auto [p1, p2] = averaged_zeros_closed(cfg);
    const StabilityVerdict verdict = stability_verdict(cfg);
    json doc;
    doc["manifest"] = manifest("zeros", o);
    json zeros = json::array();
    for (const AveragedZero* z : {&p1, &p2}) {
        // 10% perturbed seed so the refinement is not a no-op
        const State4 seed = State4::from(1.1 * z->point.vec());
        const AveragedZero refined = averaged_zeros_newton(cfg, seed, false, 1e-13);
        json entry;
        entry["closed_form"] = to_json(*z);
        entry["newton"] = to_json(refined);
        entry["newton_distance"] = norm_inf(refined.point.vec() - z->point.vec());
        zeros.push_back(entry);
    }
    doc["zeros"] = zeros;
    doc["det_jacobian_closed"] = jacobian_det_closed(cfg);
    doc["spectrum_closed"] = to_json(averaged_spectrum_closed(cfg));
    doc["verdict"] = {{"theorem_applicable", verdict.theorem_applicable}, {"note", verdict.note}};
    emit(doc, o, out);
    return kOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    if (!(o.epsilon >= 0.0) || !std::isfinite(o.epsilon)) throw InputError("--epsilon must be finite and >= 0");
    const RegimeConfig cfg = admissible(o, o.epsilon);
    const ShootOptions sopt = shoot_options(o);
    json doc;
    doc["manifest"] = manifest("verify", o);
    try {
        const auto [g1, g2] = find_bifurcating_orbits(cfg, sopt);
        json orbits = json::array();
        for (const PeriodicOrbit* g : {&g1, &g2}) {
            const PeriodicOrbit orig = unscale_orbit(*g);
            json entry;
            entry["scaled"] = to_json(*g);
            entry["original"] = to_json(orig);
            entry["recurrence_scaled"] = recurrence_error(cfg, *g);
            entry["recurrence_original"] = recurrence_error(cfg, orig);
            orbits.push_back(entry);
        }
        doc["status"] = "accepted";
        doc["orbits"] = orbits;
        emit(doc, o, out);
        return kOk;
    } catch (const ShootFailure& e) {
        doc["status"] = "failed";
        doc["failed_branch"] = e.branch();
        doc["diagnostics"] = to_json(e.report());
        emit(doc, o, out);
        err << "verify: " << e.what() << '\n';
        return kNumerical;
    }
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const std::vector<double> eps = parse_list(o.epsilons, "--epsilons");
    for (std::size_t i = 0; i < eps.size(); ++i)
        if (!(eps[i] > 0.0) || !std::isfinite(eps[i]) || (i > 0 && !(eps[i] > eps[i - 1])))
            throw InputError("--epsilons must be positive and strictly ascending");
    const RegimeConfig cfg = admissible(o, eps.front());
    const ShootOptions sopt = shoot_options(o);

    std::ofstream file;
    if (!o.out.empty()) file = open_output(o.out);
    std::ostream& csv = o.out.empty() ? out : file;
    std::ostream& summary_stream = o.out.empty() ? err : out;

    const SweepResult res = continuation_sweep(cfg, eps, sopt);
    csv << "epsilon,branch,distance_to_p,period_error,residual,max_multiplier_modulus,converged\n";
    bool all = true;
    for (const SweepRow& row : res.rows) {
        all = all && row.converged;
        csv << format_double(row.epsilon) << ',' << row.branch << ',' << csv_number(row.distance_to_p) << ','
            << csv_number(row.period_error) << ',' << csv_number(row.residual) << ','
            << csv_number(row.max_multiplier_modulus) << ',' << (row.converged ? "true" : "false") << '\n';
    }
    csv.flush();
    if (!csv) throw InputError("write to output failed");

    json doc;
    doc["manifest"] = manifest("sweep", o);
    json slopes = json::array();
    for (const auto& s : res.slopes) slopes.push_back(s ? json(*s) : json(nullptr));
    doc["slopes"] = slopes;
    json messages = json::array();
    for (const SweepRow& row : res.rows)
        messages.push_back({{"epsilon", row.epsilon}, {"branch", row.branch}, {"message", row.message}});
    doc["rows"] = messages;
    doc["all_converged"] = all;
    emit(doc, o, summary_stream);
    return all ? kOk : kNumerical;
}

int cmd_orbit(const Options& o, std::ostream& out, std::ostream& err) {
    if (!(o.epsilon >= 0.0) || !std::isfinite(o.epsilon)) throw InputError("--epsilon must be finite and >= 0");
    if (o.samples < 2) throw InputError("--samples must be at least 2");
    const RegimeConfig cfg = admissible(o, o.epsilon);
    const ShootOptions sopt = shoot_options(o);

    std::ofstream file;
    if (!o.out.empty()) file = open_output(o.out);
    std::ostream& csv = o.out.empty() ? out : file;

    PeriodicOrbit orbit;
    try {
        const auto orbits = find_bifurcating_orbits(cfg, sopt);
        orbit = o.branch == 1 ? orbits.first : orbits.second;
    } catch (const ShootFailure& e) {
        err << "orbit: " << e.what() << '\n';
        return kNumerical;
    }
    const Trajectory traj = integrate(frame_field(cfg, Frame::scaled), orbit.initial_state, orbit.period,
                                      sopt.integrator, o.samples);
    const double scale = o.frame == "original" ? cfg.epsilon() : 1.0;
    csv << "t,x,y,z,w\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const State4& s = traj.states[k];
        csv << format_double(traj.t[k]) << ',' << format_double(scale * s.x) << ',' << format_double(scale * s.y)
            << ',' << format_double(scale * s.z) << ',' << format_double(scale * s.w) << '\n';
    }
    csv.flush();
    if (!csv) throw InputError("write to output failed");
    return kOk;
}

struct CheckRow {
    std::string set;
    std::string check;
    double value;
    double bound;
    [[nodiscard]] bool pass() const { return value <= bound; }
};

int cmd_selftest(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.nodes < 8) throw InputError("--nodes must be at least 8");
    std::mt19937_64 rng(o.seed);
    std::vector<std::pair<std::string, ChenParams>> sets{{"default", o.params()}};
    for (int i = 1; i <= 5; ++i) sets.emplace_back("random" + std::to_string(i), draw_admissible_params(rng));

    std::vector<CheckRow> rows;
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    for (const auto& [name, p] : sets) {
        const RegimeConfig cfg = RegimeConfig::from_params(p, 0.0);
        const double t_period = period(cfg).period;

        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const State4 u{coord(rng), coord(rng), coord(rng), coord(rng)};
            const double diff =
                norm_inf(bifurcation_f_closed(cfg, u).vec() - bifurcation_f_quadrature(cfg, u, o.nodes).vec());
            worst = std::max(worst, diff / (1.0 + std::pow(norm_inf(u.vec()), 2)));
        }
        rows.push_back({name, "f_closed_vs_quadrature", worst, 1e-10});

        worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            const double t = t_period * k / 10.0;
            const Mat4 prod = fundamental_matrix(cfg, t) * fundamental_matrix_inverse(cfg, t);
            worst = std::max(worst, norm_inf(prod - Mat4::identity()));
        }
        rows.push_back({name, "phi_times_phi_inverse", worst, 1e-9});

        rows.push_back({name, "origin_spectrum_dual_path",
                        spectrum_distance(origin_eigenvalues(p), eig4(jacobian_full(p, State4{}))), 1e-8});

        double rel = std::numeric_limits<double>::infinity();
        try {
            const auto zeros = averaged_zeros_closed(cfg);
            const double closed = jacobian_det_closed(cfg);
            const double fd = determinant(averaged_jacobian_fd(cfg, zeros.first.point));
            rel = std::abs(fd - closed) / std::max(std::abs(closed), 1e-300);
        } catch (const Error& e) {
            err << "selftest: " << name << ": " << e.what() << '\n';
        }
        rows.push_back({name, "fd_jacobian_determinant", rel, 1e-5});
    }
    if (o.force_fail) rows.push_back({"harness", "forced_failure", 1.0, 0.0});

    json doc;
    doc["manifest"] = manifest("selftest", o);
    json params = json::object();
    for (const auto& [name, p] : sets) params[name] = {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"r", p.r}};
    doc["parameter_sets"] = params;
    json checks = json::array();
    bool all = true;
    for (const auto& row : rows) {
        all = all && row.pass();
        checks.push_back(
            {{"set", row.set}, {"check", row.check}, {"value", row.value}, {"bound", row.bound}, {"pass", row.pass()}});
    }
    doc["checks"] = checks;
    doc["all_pass"] = all;

    if (o.json_out) {
        emit(doc, o, out);
    } else {
        for (const auto& row : rows)
            out << (row.pass() ? "PASS " : "FAIL ") << row.set << ' ' << row.check << ' ' << format_double(row.value)
                << " <= " << format_double(row.bound) << '\n';
    }
    for (const auto& row : rows)
        if (!row.pass()) err << "selftest: failed check " << row.set << '/' << row.check << '\n';
    return all ? kOk : kNumerical;
}

void add_params(CLI::App* sub, Options& o, bool allow_c) {
    sub->add_option("--a", o.a, "coefficient a")->capture_default_str();
    sub->add_option("--b", o.b, "coefficient b")->capture_default_str();
    sub->add_option("--c", o.c, allow_c ? "coefficient c (defaults to a)" : "coefficient c (must equal a)");
    sub->add_option("--d", o.d, "coefficient d")->capture_default_str();
    sub->add_option("--r", o.r, "coefficient r")->capture_default_str();
    sub->add_flag("--json", o.json_out, "emit JSON instead of key: value lines");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Zero-Hopf bifurcation toolkit for the hyperchaotic Chen system", "chenhopf"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto* check = app.add_subcommand("check", "report which zero-Hopf hypotheses hold");
    add_params(check, o, true);
    auto* spectrum = app.add_subcommand("spectrum", "origin eigenvalues, closed form and numeric");
    add_params(spectrum, o, true);

    auto* favg = app.add_subcommand("favg", "evaluate the averaged bifurcation function");
    add_params(favg, o, false);
    favg->add_option("--point", o.point, "x,y,z,w")->capture_default_str();
    favg->add_option("--method", o.method)->check(CLI::IsMember({"closed", "quadrature", "both"}))->capture_default_str();
    favg->add_option("--nodes", o.nodes, "quadrature nodes")->capture_default_str();

    auto* zeros = app.add_subcommand("zeros", "averaged zeros, Jacobian data and stability verdict");
    add_params(zeros, o, false);

    auto* verify = app.add_subcommand("verify", "shoot for both bifurcating periodic orbits");
    add_params(verify, o, false);
    verify->add_option("--epsilon", o.epsilon)->capture_default_str();
    verify->add_option("--tol", o.tol, "Newton tolerance")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "continuation in epsilon, CSV rows plus summary");
    add_params(sweep, o, false);
    sweep->add_option("--epsilons", o.epsilons, "comma-separated, ascending")->capture_default_str();
    sweep->add_option("--out", o.out, "CSV path (default: standard output)");
    sweep->add_option("--tol", o.tol, "Newton tolerance")->capture_default_str();

    auto* orbit = app.add_subcommand("orbit", "sample one bifurcating orbit over a period as CSV");
    add_params(orbit, o, false);
    orbit->add_option("--epsilon", o.epsilon)->capture_default_str();
    orbit->add_option("--branch", o.branch)->check(CLI::IsMember({1, 2}))->capture_default_str();
    orbit->add_option("--samples", o.samples)->capture_default_str();
    orbit->add_option("--frame", o.frame)->check(CLI::IsMember({"scaled", "original"}))->capture_default_str();
    orbit->add_option("--out", o.out, "CSV path (default: standard output)");
    orbit->add_option("--tol", o.tol, "Newton tolerance")->capture_default_str();

    auto* selftest = app.add_subcommand("selftest", "cross-oracle checks on default plus random parameter sets");
    add_params(selftest, o, false);
    selftest->add_option("--seed", o.seed)->capture_default_str();
    selftest->add_option("--nodes", o.nodes)->capture_default_str();
    selftest->add_flag("--force-fail", o.force_fail)->group("");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return kInput;
    }

    try {
        if (*check) return cmd_check(o, out);
        if (*spectrum) return cmd_spectrum(o, out);
        if (*favg) return cmd_favg(o, out);
        if (*zeros) return cmd_zeros(o, out);
        if (*verify) return cmd_verify(o, out, err);
        if (*sweep) return cmd_sweep(o, out, err);
        if (*orbit) return cmd_orbit(o, out, err);
        if (*selftest) return cmd_selftest(o, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    } catch (const HypothesisError& e) {
        err << "hypothesis: " << e.what() << '\n';
        return kHypothesis;
    } catch (const RegimeError& e) {
        err << "hypothesis: " << e.what() << '\n';
        return kHypothesis;
    } catch (const Error& e) {
        err << "numerical: " << e.what() << '\n';
        return kNumerical;
    }
    return kInput;
}

}  // namespace chenhopf::cli
