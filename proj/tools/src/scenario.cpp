#include "beamloc/cli/scenario.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace beamloc::cli {

namespace {

using nlohmann::json;

constexpr double kMm = 1e-3;
constexpr double kGPa = 1e9;

// Reads one JSON object, remembering which keys were consumed so that
// anything left over can be reported as unknown.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(path_, "must be an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return node_.at(key);
    }

    Section section(const std::string& key) { return Section(raw(key), child_path(key)); }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number()) fail(child_path(key), "must be a number");
        out = v.get<double>();
    }

    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(child_path(key), "must be an integer");
        out = v.get<int>();
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_unsigned()) fail(child_path(key), "must be a non-negative integer");
        out = v.get<std::uint64_t>();
    }

    void string(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_string()) fail(child_path(key), "must be a string");
        out = v.get<std::string>();
    }

    template <typename Enum, typename Parse>
    void enumeration(const std::string& key, Enum& out, Parse parse) {
        if (!has(key)) return;
        std::string text;
        string(key, text);
        try {
            out = parse(text);
        } catch (const InvalidInputError& e) {
            fail(child_path(key), e.what());
        }
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!used_.count(key)) fail(child_path(key), "unknown key");
        }
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& message) {
        throw InvalidInputError(fmt::format("scenario: {}: {}", path.empty() ? "<root>" : path, message));
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

// Runs a library validator and prefixes its message with the section path.
template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const InvalidInputError& e) {
        Section::fail(path, e.what());
    }
}

void read_beam(Section s, BeamConfig& beam) {
    double length = beam.length / kMm, width = beam.width / kMm, thickness = beam.thickness / kMm;
    double modulus = beam.healthy_youngs_modulus / kGPa;
    s.number("length_mm", length);
    s.number("width_mm", width);
    s.number("thickness_mm", thickness);
    s.number("density_kg_m3", beam.density);
    s.number("youngs_modulus_gpa", modulus);
    s.integer("elements", beam.n_elements);
    s.enumeration("boundary_condition", beam.boundary_condition, boundary_condition_from_string);
    s.finish();
    beam.length = length * kMm;
    beam.width = width * kMm;
    beam.thickness = thickness * kMm;
    beam.healthy_youngs_modulus = modulus * kGPa;
}

void read_damage(Section s, DamageScenario& damage) {
    if (s.has("sites")) {
        const std::string path = s.child_path("sites");
        const json& sites = s.raw("sites");
        if (!sites.is_array()) Section::fail(path, "must be an array");
        for (std::size_t i = 0; i < sites.size(); ++i) {
            Section site(sites[i], fmt::format("{}[{}]", path, i));
            int element = 0;
            ElementDamage d;
            if (!site.has("element")) Section::fail(site.child_path("element"), "is required");
            if (!site.has("reduction")) Section::fail(site.child_path("reduction"), "is required");
            site.integer("element", element);
            site.number("reduction", d.reduction);
            site.finish();
            if (element < 1) Section::fail(site.child_path("element"), "element numbers start at 1");
            d.element = element - 1;
            damage.damaged_elements.push_back(d);
        }
    }
    s.number("noise_level", damage.noise_level);
    s.seed("seed", damage.seed);
    s.finish();
}

std::vector<int> read_element_list(Section& s, const std::string& key) {
    const std::string path = s.child_path(key);
    const json& list = s.raw(key);
    if (!list.is_array()) Section::fail(path, "must be an array");
    std::vector<int> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_number_integer()) Section::fail(fmt::format("{}[{}]", path, i), "must be an integer");
        const int element = list[i].get<int>();
        if (element < 1) Section::fail(fmt::format("{}[{}]", path, i), "element numbers start at 1");
        out.push_back(element - 1);
    }
    return out;
}

void read_fusion(Section s, HybridConfig& hybrid) {
    FusionConfig& fusion = hybrid.fusion;
    if (s.has("features")) {
        const std::string path = s.child_path("features");
        const json& list = s.raw("features");
        if (!list.is_array()) Section::fail(path, "must be an array");
        fusion.features.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string item = fmt::format("{}[{}]", path, i);
            if (!list[i].is_string()) Section::fail(item, "must be a string");
            checked(item, [&] { fusion.features.push_back(feature_kind_from_string(list[i].get<std::string>())); });
        }
    }
    if (s.has("ignorance_weights")) {
        Section w = s.section("ignorance_weights");
        w.number("distribution", fusion.weights.distribution);
        w.number("relative", fusion.weights.relative);
        w.number("rank", fusion.weights.rank);
        w.number("confidence", fusion.weights.confidence);
        w.finish();
    }
    s.number("lambda_f", fusion.lambda_f);
    s.number("tau", hybrid.tau_fraction);
    s.integer("fallback_top_n", hybrid.fallback_top_n);
    if (s.has("candidates")) hybrid.forced_candidates = read_element_list(s, "candidates");
    s.finish();
}

void read_objective(Section s, ObjectiveWeights& w) {
    s.number("alpha_f", w.frequency);
    s.number("alpha_g", w.governing);
    s.number("alpha_c", w.curvature);
    s.number("gamma", w.gamma);
    s.number("curvature_epsilon", w.curvature_epsilon);
    s.enumeration("penalty", w.penalty, penalty_form_from_string);
    s.finish();
}

void read_optimizer(Section s, OptimizerConfig& opt) {
    s.enumeration("method", opt.method, method_from_string);
    s.integer("memory", opt.memory);
    s.integer("max_iterations", opt.max_iterations);
    s.number("grad_tolerance", opt.grad_tolerance);
    s.number("step_tolerance", opt.step_tolerance);
    s.number("wolfe_c1", opt.wolfe_c1);
    s.number("wolfe_c2", opt.wolfe_c2);
    s.integer("max_line_search", opt.max_line_search);
    s.number("initial_step", opt.initial_step);
    if (s.has("trust_region")) {
        Section tr = s.section("trust_region");
        TrustRegionSettings& t = opt.trust_region;
        tr.number("initial_radius", t.initial_radius);
        tr.number("max_radius", t.max_radius);
        tr.number("accept_ratio", t.accept_ratio);
        tr.number("shrink_below", t.shrink_below);
        tr.number("expand_above", t.expand_above);
        tr.number("shrink_factor", t.shrink_factor);
        tr.number("expand_factor", t.expand_factor);
        tr.finish();
    }
    s.finish();
}

void read_hierarchical(Section s, HierarchicalConfig& h) {
    s.integer("initial_groups", h.initial_groups);
    s.integer("group_size", h.group_size);
    s.number("stage_tol_fraction", h.stage_tol_fraction);
    s.number("final_grad_tolerance", h.final_grad_tolerance);
    s.integer("max_stages", h.max_stages);
    s.finish();
}

json element_list(const std::vector<int>& elements) {
    json out = json::array();
    for (int e : elements) out.push_back(e + 1);
    return out;
}

}  // namespace

void ScenarioFile::validate() const {
    checked("beam", [&] { beam.validate(); });
    std::set<int> seen;
    for (std::size_t i = 0; i < damage.damaged_elements.size(); ++i) {
        const int element = damage.damaged_elements[i].element;
        const std::string path = fmt::format("damage.sites[{}].element", i);
        if (element >= beam.n_elements) {
            Section::fail(path, fmt::format("element {} exceeds the {} elements", element + 1, beam.n_elements));
        }
        if (!seen.insert(element).second) Section::fail(path, fmt::format("element {} is listed twice", element + 1));
    }
    checked("damage", [&] { damage.validate(beam); });
    const int max_modes = make_dof_map(beam).n_free;
    if (n_modes < 1 || n_modes > max_modes) {
        Section::fail("modes", fmt::format("must lie in [1, {}], got {}", max_modes, n_modes));
    }
    checked("fusion", [&] { hybrid.validate(); });
    if (hybrid.forced_candidates) {
        for (int e : *hybrid.forced_candidates) {
            if (e >= beam.n_elements) {
                Section::fail("fusion.candidates", fmt::format("element {} exceeds the {} elements", e + 1, beam.n_elements));
            }
        }
    }
    checked("objective", [&] { weights.validate(); });
    checked("optimizer", [&] { optimizer.validate(1); });
    checked("hierarchical", [&] { hierarchical.validate(beam); });
}

ScenarioFile parse_scenario(std::string_view json_text, std::string_view fallback_name) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw InvalidInputError(fmt::format("scenario: invalid JSON: {}", e.what()));
    }

    ScenarioFile out;
    out.name = std::string(fallback_name);
    Section root(doc, "");
    root.string("name", out.name);
    root.enumeration("strategy", out.strategy, strategy_from_string);
    root.integer("modes", out.n_modes);
    if (root.has("beam")) read_beam(root.section("beam"), out.beam);
    if (root.has("damage")) read_damage(root.section("damage"), out.damage);
    if (root.has("fusion")) read_fusion(root.section("fusion"), out.hybrid);
    if (root.has("objective")) read_objective(root.section("objective"), out.weights);
    if (root.has("optimizer")) read_optimizer(root.section("optimizer"), out.optimizer);
    if (root.has("hierarchical")) read_hierarchical(root.section("hierarchical"), out.hierarchical);
    root.finish();

    out.damage.name = out.name;
    out.validate();
    return out;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError(fmt::format("cannot open scenario file '{}'", path.string()));
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path.stem().string());
}

std::string to_json(const ScenarioFile& s) {
    json doc;
    doc["name"] = s.name;
    doc["strategy"] = std::string(to_string(s.strategy));
    doc["modes"] = s.n_modes;
    doc["beam"] = {
        {"length_mm", s.beam.length / kMm},
        {"width_mm", s.beam.width / kMm},
        {"thickness_mm", s.beam.thickness / kMm},
        {"density_kg_m3", s.beam.density},
        {"youngs_modulus_gpa", s.beam.healthy_youngs_modulus / kGPa},
        {"elements", s.beam.n_elements},
        {"boundary_condition", std::string(to_string(s.beam.boundary_condition))},
    };
    json sites = json::array();
    for (const auto& d : s.damage.damaged_elements) sites.push_back({{"element", d.element + 1}, {"reduction", d.reduction}});
    doc["damage"] = {{"sites", sites}, {"noise_level", s.damage.noise_level}, {"seed", s.damage.seed}};

    json features = json::array();
    for (FeatureKind k : s.hybrid.fusion.features) features.push_back(std::string(to_string(k)));
    const IgnoranceWeights& iw = s.hybrid.fusion.weights;
    doc["fusion"] = {
        {"features", features},
        {"ignorance_weights",
         {{"distribution", iw.distribution}, {"relative", iw.relative}, {"rank", iw.rank}, {"confidence", iw.confidence}}},
        {"lambda_f", s.hybrid.fusion.lambda_f},
        {"tau", s.hybrid.tau_fraction},
        {"fallback_top_n", s.hybrid.fallback_top_n},
    };
    if (s.hybrid.forced_candidates) doc["fusion"]["candidates"] = element_list(*s.hybrid.forced_candidates);

    doc["objective"] = {
        {"alpha_f", s.weights.frequency},   {"alpha_g", s.weights.governing},
        {"alpha_c", s.weights.curvature},   {"gamma", s.weights.gamma},
        {"curvature_epsilon", s.weights.curvature_epsilon},
        {"penalty", std::string(to_string(s.weights.penalty))},
    };
    const OptimizerConfig& o = s.optimizer;
    const TrustRegionSettings& t = o.trust_region;
    doc["optimizer"] = {
        {"method", std::string(to_string(o.method))},
        {"memory", o.memory},
        {"max_iterations", o.max_iterations},
        {"grad_tolerance", o.grad_tolerance},
        {"step_tolerance", o.step_tolerance},
        {"wolfe_c1", o.wolfe_c1},
        {"wolfe_c2", o.wolfe_c2},
        {"max_line_search", o.max_line_search},
        {"initial_step", o.initial_step},
        {"trust_region",
         {{"initial_radius", t.initial_radius},
          {"max_radius", t.max_radius},
          {"accept_ratio", t.accept_ratio},
          {"shrink_below", t.shrink_below},
          {"expand_above", t.expand_above},
          {"shrink_factor", t.shrink_factor},
          {"expand_factor", t.expand_factor}}},
    };
    const HierarchicalConfig& h = s.hierarchical;
    doc["hierarchical"] = {
        {"initial_groups", h.initial_groups},
        {"group_size", h.group_size},
        {"stage_tol_fraction", h.stage_tol_fraction},
        {"final_grad_tolerance", h.final_grad_tolerance},
        {"max_stages", h.max_stages},
    };
    return doc.dump(2) + "\n";
}

}  // namespace beamloc::cli
