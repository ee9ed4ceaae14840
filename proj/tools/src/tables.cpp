#include "beamloc/cli/tables.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace beamloc::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kMm = 1e-3;
constexpr double kGPa = 1e9;
const std::string kThetaLabel = "theta";

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

[[noreturn]] void bad_table(const std::string& what) { throw InvalidInputError(what); }

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    bad_table(fmt::format("CSV column '{}' not found", name));
}

double CsvTable::number(std::size_t row, int col) const {
    const std::string& text = rows.at(row).at(static_cast<std::size_t>(col));
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        bad_table(fmt::format("CSV row {} column '{}': '{}' is not a number", row + 1, header[col], text));
    }
}

int CsvTable::integer(std::size_t row, int col) const {
    const std::string& text = rows.at(row).at(static_cast<std::size_t>(col));
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        bad_table(fmt::format("CSV row {} column '{}': '{}' is not an integer", row + 1, header[col], text));
    }
    return v;
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void write_csv(const fs::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError(fmt::format("cannot write '{}'", path.string()));
    out << fmt::format("{}\n", fmt::join(table.header, ","));
    for (const auto& row : table.rows) out << fmt::format("{}\n", fmt::join(row, ","));
    if (!out) throw InvalidInputError(fmt::format("write to '{}' failed", path.string()));
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError(fmt::format("cannot open '{}'", path.string()));
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) bad_table(fmt::format("'{}' is empty", path.string()));
    table.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != table.header.size()) {
            bad_table(fmt::format("'{}': row {} has {} fields, expected {}", path.string(), table.rows.size() + 1,
                                  row.size(), table.header.size()));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------

void write_measurement(const fs::path& path, const MeasuredModes& modes) {
    CsvTable t;
    t.header = {"mode", "node", "x_mm", "shape", "curvature"};
    for (int j = 0; j < modes.n_modes(); ++j) {
        for (int i = 0; i < modes.n_points(); ++i) {
            t.rows.push_back({std::to_string(j + 1), std::to_string(i + 1), format_number(modes.grid[i] / kMm),
                              format_number(modes.mode_shapes(j, i)), format_number(modes.curvatures(j, i))});
        }
    }
    write_csv(path, t);
}

MeasuredModes read_measurement(const fs::path& path, const Eigen::VectorXd& frequencies) {
    const CsvTable t = read_csv(path);
    const int c_mode = t.column("mode"), c_node = t.column("node"), c_x = t.column("x_mm");
    const int c_shape = t.column("shape"), c_curv = t.column("curvature");
    int n_modes = 0, n_nodes = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        n_modes = std::max(n_modes, t.integer(r, c_mode));
        n_nodes = std::max(n_nodes, t.integer(r, c_node));
    }
    if (n_modes < 1 || static_cast<std::size_t>(n_modes) * n_nodes != t.rows.size()) {
        bad_table(fmt::format("'{}': expected one row per (mode, node)", path.string()));
    }
    if (frequencies.size() != n_modes) {
        bad_table(fmt::format("'{}' has {} modes but {} frequencies were given", path.string(), n_modes,
                              frequencies.size()));
    }
    MeasuredModes m;
    m.frequencies = frequencies;
    m.mode_shapes.resize(n_modes, n_nodes);
    m.curvatures.resize(n_modes, n_nodes);
    m.grid.resize(n_nodes);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const int j = t.integer(r, c_mode) - 1, i = t.integer(r, c_node) - 1;
        if (j < 0 || i < 0) bad_table(fmt::format("'{}': mode and node numbers start at 1", path.string()));
        m.mode_shapes(j, i) = t.number(r, c_shape);
        m.curvatures(j, i) = t.number(r, c_curv);
        m.grid[i] = t.number(r, c_x) * kMm;
    }
    m.validate();
    return m;
}

void write_frequencies(const fs::path& path, const MeasuredModes& healthy, const MeasuredModes& damaged) {
    CsvTable t;
    t.header = {"state", "mode", "omega_rad_s"};
    for (int j = 0; j < healthy.n_modes(); ++j) {
        t.rows.push_back({"healthy", std::to_string(j + 1), format_number(healthy.frequencies[j])});
    }
    for (int j = 0; j < damaged.n_modes(); ++j) {
        t.rows.push_back({"damaged", std::to_string(j + 1), format_number(damaged.frequencies[j])});
    }
    write_csv(path, t);
}

Eigen::VectorXd read_frequencies(const fs::path& path, const std::string& state) {
    const CsvTable t = read_csv(path);
    const int c_state = t.column("state"), c_mode = t.column("mode"), c_omega = t.column("omega_rad_s");
    std::map<int, double> by_mode;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r][c_state] == state) by_mode[t.integer(r, c_mode)] = t.number(r, c_omega);
    }
    std::vector<double> out;
    for (const auto& [mode, omega] : by_mode) {
        if (mode != static_cast<int>(out.size()) + 1) bad_table(fmt::format("'{}': modes of '{}' are not contiguous", path.string(), state));
        out.push_back(omega);
    }
    if (out.empty()) bad_table(fmt::format("'{}' has no '{}' frequencies", path.string(), state));
    return to_vector(out);
}

// ---------------------------------------------------------------------------

void write_features(const fs::path& path, const FeatureTable& table) {
    CsvTable t;
    t.header = {"element"};
    t.header.insert(t.header.end(), table.names.begin(), table.names.end());
    const Eigen::Index n = table.values.empty() ? 0 : table.values.front().size();
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<std::string> row{std::to_string(i + 1)};
        for (const auto& v : table.values) row.push_back(format_number(v[i]));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

FeatureTable read_features(const fs::path& path) {
    const CsvTable t = read_csv(path);
    FeatureTable out;
    out.names.assign(t.header.begin() + 1, t.header.end());
    for (std::size_t c = 1; c < t.header.size(); ++c) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
        for (std::size_t r = 0; r < t.rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = t.number(r, static_cast<int>(c));
        out.values.push_back(std::move(v));
    }
    return out;
}

void write_bpas(const fs::path& path, const BpaTable& table) {
    CsvTable t;
    t.header = {"feature", "element", "alpha", "mass"};
    for (std::size_t f = 0; f < table.features.size(); ++f) {
        const auto& m = table.singleton_masses[f];
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            t.rows.push_back({table.features[f], std::to_string(i + 1), format_number(table.alpha[f][i]),
                              format_number(m[i])});
        }
        t.rows.push_back({table.features[f], kThetaLabel, "", format_number(table.theta_mass[f])});
    }
    write_csv(path, t);
}

BpaTable read_bpas(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const int c_feature = t.column("feature"), c_element = t.column("element");
    const int c_alpha = t.column("alpha"), c_mass = t.column("mass");
    BpaTable out;
    std::vector<double> masses, alphas;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& feature = t.rows[r][c_feature];
        if (t.rows[r][c_element] == kThetaLabel) {
            out.features.push_back(feature);
            out.singleton_masses.push_back(to_vector(masses));
            out.alpha.push_back(to_vector(alphas));
            out.theta_mass.push_back(t.number(r, c_mass));
            masses.clear();
            alphas.clear();
        } else {
            masses.push_back(t.number(r, c_mass));
            alphas.push_back(t.number(r, c_alpha));
        }
    }
    if (!masses.empty()) bad_table(fmt::format("'{}': last feature has no theta row", path.string()));
    return out;
}

void write_fusion(const fs::path& fused_path, const fs::path& summary_path, const FusionTable& table) {
    CsvTable t;
    t.header = {"element", "belief", "plausibility", "candidate"};
    for (Eigen::Index i = 0; i < table.belief.size(); ++i) {
        const bool candidate =
            std::find(table.candidates.begin(), table.candidates.end(), static_cast<int>(i)) != table.candidates.end();
        t.rows.push_back({std::to_string(i + 1), format_number(table.belief[i]), format_number(table.plausibility[i]),
                          candidate ? "1" : "0"});
    }
    write_csv(fused_path, t);

    CsvTable s;
    s.header = {"quantity", "value"};
    s.rows = {{"theta_mass", format_number(table.theta_mass)},
              {"conflict", format_number(table.conflict)},
              {"concentration", format_number(table.concentration)}};
    write_csv(summary_path, s);
}

FusionTable read_fusion(const fs::path& fused_path, const fs::path& summary_path) {
    const CsvTable t = read_csv(fused_path);
    const int c_bel = t.column("belief"), c_pl = t.column("plausibility"), c_cand = t.column("candidate");
    FusionTable out;
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    out.belief.resize(n);
    out.plausibility.resize(n);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out.belief[static_cast<Eigen::Index>(r)] = t.number(r, c_bel);
        out.plausibility[static_cast<Eigen::Index>(r)] = t.number(r, c_pl);
        if (t.integer(r, c_cand) == 1) out.candidates.push_back(static_cast<int>(r));
    }
    const CsvTable s = read_csv(summary_path);
    const int c_q = s.column("quantity"), c_v = s.column("value");
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
        const std::string& q = s.rows[r][c_q];
        if (q == "theta_mass") out.theta_mass = s.number(r, c_v);
        else if (q == "conflict") out.conflict = s.number(r, c_v);
        else if (q == "concentration") out.concentration = s.number(r, c_v);
    }
    return out;
}

// ---------------------------------------------------------------------------

TraceTable make_trace_table(const RunTrace& trace) {
    TraceTable out;
    for (std::size_t r = 0; r < trace.records.size(); ++r) {
        const IterationRecord& rec = trace.records[r];
        TraceRow row;
        row.record = static_cast<int>(r);
        row.iteration = rec.iteration;
        row.stage = rec.stage;
        row.objective = rec.value;
        row.grad_norm = rec.grad_norm;
        row.step_norm = rec.step_norm;
        row.step_length = rec.step_length;
        row.accepted = rec.accepted;
        row.evaluations = rec.evaluation;
        row.moduli_gpa = rec.theta / kGPa;
        out.rows.push_back(std::move(row));
    }
    for (const StageEvent& e : trace.events) {
        out.stage_events.push_back({static_cast<int>(e.record), e.value_before, e.value_after});
    }
    return out;
}

ProfileTable make_profile_table(const BeamConfig& config, const DamageParams& identified, const DamageParams& truth) {
    ProfileTable out;
    out.identified_gpa = identified.youngs_moduli / kGPa;
    out.healthy_gpa = Eigen::VectorXd::Constant(config.n_elements, config.healthy_youngs_modulus / kGPa);
    out.true_gpa = truth.youngs_moduli / kGPa;
    return out;
}

void write_trace(const fs::path& dir, const TraceTable& table) {
    CsvTable theta, objective, events;
    const Eigen::Index n = table.rows.empty() ? 0 : table.rows.front().moduli_gpa.size();
    theta.header = {"record", "iteration", "stage"};
    for (Eigen::Index i = 0; i < n; ++i) theta.header.push_back(fmt::format("E_{}_gpa", i + 1));
    objective.header = {"record",    "iteration",   "stage",    "objective",  "grad_norm",
                         "step_norm", "step_length", "accepted", "evaluations"};
    for (const TraceRow& row : table.rows) {
        std::vector<std::string> t{std::to_string(row.record), std::to_string(row.iteration), row.stage};
        for (Eigen::Index i = 0; i < row.moduli_gpa.size(); ++i) t.push_back(format_number(row.moduli_gpa[i]));
        theta.rows.push_back(std::move(t));
        objective.rows.push_back({std::to_string(row.record), std::to_string(row.iteration), row.stage,
                                  format_number(row.objective), format_number(row.grad_norm),
                                  format_number(row.step_norm), format_number(row.step_length),
                                  row.accepted ? "1" : "0", std::to_string(row.evaluations)});
    }
    events.header = {"record", "value_before", "value_after"};
    for (const StageRow& e : table.stage_events) {
        events.rows.push_back({std::to_string(e.record), format_number(e.value_before), format_number(e.value_after)});
    }
    write_csv(dir / "theta_trace.csv", theta);
    write_csv(dir / "objective_trace.csv", objective);
    write_csv(dir / "stage_events.csv", events);
}

TraceTable read_trace(const fs::path& dir) {
    const CsvTable theta = read_csv(dir / "theta_trace.csv");
    const CsvTable objective = read_csv(dir / "objective_trace.csv");
    const CsvTable events = read_csv(dir / "stage_events.csv");
    if (theta.rows.size() != objective.rows.size()) {
        bad_table(fmt::format("'{}': theta and objective traces differ in length", dir.string()));
    }
    TraceTable out;
    const int c_rec = objective.column("record"), c_it = objective.column("iteration");
    const int c_stage = objective.column("stage"), c_obj = objective.column("objective");
    const int c_g = objective.column("grad_norm"), c_sn = objective.column("step_norm");
    const int c_sl = objective.column("step_length"), c_acc = objective.column("accepted");
    const int c_ev = objective.column("evaluations");
    const int first_modulus = theta.column("stage") + 1;
    for (std::size_t r = 0; r < objective.rows.size(); ++r) {
        TraceRow row;
        row.record = objective.integer(r, c_rec);
        row.iteration = objective.integer(r, c_it);
        row.stage = objective.rows[r][c_stage];
        row.objective = objective.number(r, c_obj);
        row.grad_norm = objective.number(r, c_g);
        row.step_norm = objective.number(r, c_sn);
        row.step_length = objective.number(r, c_sl);
        row.accepted = objective.integer(r, c_acc) == 1;
        row.evaluations = objective.integer(r, c_ev);
        row.moduli_gpa.resize(static_cast<Eigen::Index>(theta.header.size()) - first_modulus);
        for (Eigen::Index i = 0; i < row.moduli_gpa.size(); ++i) {
            row.moduli_gpa[i] = theta.number(r, first_modulus + static_cast<int>(i));
        }
        out.rows.push_back(std::move(row));
    }
    const int e_rec = events.column("record"), e_b = events.column("value_before"), e_a = events.column("value_after");
    for (std::size_t r = 0; r < events.rows.size(); ++r) {
        out.stage_events.push_back({events.integer(r, e_rec), events.number(r, e_b), events.number(r, e_a)});
    }
    return out;
}

void write_profile(const fs::path& path, const ProfileTable& table) {
    CsvTable t;
    t.header = {"element", "identified_gpa", "healthy_gpa", "true_gpa"};
    for (Eigen::Index i = 0; i < table.identified_gpa.size(); ++i) {
        t.rows.push_back({std::to_string(i + 1), format_number(table.identified_gpa[i]),
                          format_number(table.healthy_gpa[i]), format_number(table.true_gpa[i])});
    }
    write_csv(path, t);
}

ProfileTable read_profile(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const int c_id = t.column("identified_gpa"), c_h = t.column("healthy_gpa"), c_t = t.column("true_gpa");
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    ProfileTable out;
    out.identified_gpa.resize(n);
    out.healthy_gpa.resize(n);
    out.true_gpa.resize(n);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        out.identified_gpa[i] = t.number(r, c_id);
        out.healthy_gpa[i] = t.number(r, c_h);
        out.true_gpa[i] = t.number(r, c_t);
    }
    return out;
}

}  // namespace beamloc::cli
