#include "smdp/model_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace smdp {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "/" + key, "missing");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

SojournDist parse_sojourn(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected a sojourn object");
    const std::string kind = member(v, "kind", path).get<std::string>();
    try {
        if (kind == "exponential") return SojournDist::exponential(number(member(v, "rate", path), path + "/rate"));
        if (kind == "uniform")
            return SojournDist::uniform(number(member(v, "lo", path), path + "/lo"),
                                        number(member(v, "hi", path), path + "/hi"));
        if (kind == "weibull")
            return SojournDist::weibull(number(member(v, "shape", path), path + "/shape"),
                                        number(member(v, "scale", path), path + "/scale"));
        if (kind == "deterministic")
            return SojournDist::deterministic(number(member(v, "value", path), path + "/value"));
        if (kind == "mixture") {
            const json& comps = member(v, "components", path);
            if (!comps.is_array() || comps.empty()) fail(path + "/components", "expected a nonempty array");
            std::vector<std::pair<double, SojournDist>> parts;
            for (std::size_t k = 0; k < comps.size(); ++k) {
                const std::string cpath = path + "/components/" + std::to_string(k);
                const double w = number(member(comps[k], "weight", cpath), cpath + "/weight");
                parts.emplace_back(w, parse_sojourn(comps[k], cpath));
            }
            return SojournDist::mixture(std::move(parts));
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + "/kind", "unknown sojourn kind '" + kind + "'");
}

void sojourn_to_json(const SojournDist& dist, ordered_json& out) {
    std::visit(
        [&out](const auto& rep) {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, SojournDist::Exponential>) {
                out["kind"] = "exponential";
                out["rate"] = rep.rate;
            } else if constexpr (std::is_same_v<T, SojournDist::Uniform>) {
                out["kind"] = "uniform";
                out["lo"] = rep.lo;
                out["hi"] = rep.hi;
            } else if constexpr (std::is_same_v<T, SojournDist::Weibull>) {
                out["kind"] = "weibull";
                out["shape"] = rep.shape;
                out["scale"] = rep.scale;
            } else if constexpr (std::is_same_v<T, SojournDist::Deterministic>) {
                out["kind"] = "deterministic";
                out["value"] = rep.value;
            } else {
                out["kind"] = "mixture";
                out["components"] = ordered_json::array();
                for (std::size_t k = 0; k < rep.components.size(); ++k) {
                    ordered_json comp;
                    comp["weight"] = rep.weights[k];
                    sojourn_to_json(rep.components[k], comp);
                    out["components"].push_back(std::move(comp));
                }
            }
        },
        dist.rep());
}

Utility parse_utility(const json& v, const std::string& path) {
    const std::string kind = member(v, "kind", path).get<std::string>();
    try {
        if (kind == "linear") return Utility::linear();
        if (kind == "log1p") return Utility::log1p();
        if (kind == "exponential") return Utility::exponential(number(member(v, "gamma", path), path + "/gamma"));
        if (kind == "power") {
            const double p = number(member(v, "p", path), path + "/p");
            if (v.contains("eta")) return Utility::power(p, number(v["eta"], path + "/eta"));
            return Utility::power(p);
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + "/kind", "unknown utility kind '" + kind + "'");
}

std::string hex_hash(std::uint64_t h) {
    std::ostringstream os;
    os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(17);
    return out;
}

void write_meta_header(std::ofstream& out, const OutputMeta& meta) {
    out << "# model_hash: " << hex_hash(meta.model_hash) << "\n";
    out << "# grid: W=" << meta.grid_w << " L=" << meta.grid_l << " w_min=" << meta.w_min << "\n";
    out << "# quad_m: " << meta.quad_m << "\n";
    out << "# tol: " << meta.tol << "\n";
    out << "# seed: " << meta.seed << "\n";
}

ordered_json meta_to_json(const OutputMeta& meta) {
    ordered_json j;
    j["model_hash"] = hex_hash(meta.model_hash);
    j["grid"] = {{"W", meta.grid_w}, {"L", meta.grid_l}, {"w_min", meta.w_min}};
    j["quad_m"] = meta.quad_m;
    j["tol"] = meta.tol;
    j["seed"] = meta.seed;
    return j;
}

} // namespace

ModelFile parse_model_json(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }

    ModelFile file;
    SmdpModel& model = file.model;

    const json& states = member(doc, "states", origin);
    if (!states.is_array() || states.empty()) fail(origin + "/states", "expected a nonempty array");
    for (const auto& s : states) model.states.push_back(s.get<std::string>());
    const int S = model.num_states();

    const json& actions = member(doc, "actions", origin);
    model.actions.resize(S);
    for (int i = 0; i < S; ++i) {
        const std::string path = origin + "/actions/" + model.states[i];
        const json& list = member(actions, model.states[i], origin + "/actions");
        if (!list.is_array() || list.empty()) fail(path, "expected a nonempty array");
        for (const auto& a : list) model.actions[i].push_back(a.get<std::string>());
    }

    const json& transition = member(doc, "transition", origin);
    const json& sojourn = member(doc, "sojourn", origin);
    const json& cost = member(doc, "cost", origin);
    model.transition.resize(S);
    model.sojourn.resize(S);
    model.cost.resize(S);
    for (int i = 0; i < S; ++i) {
        const json& trow = member(transition, model.states[i], origin + "/transition");
        const json& srow = member(sojourn, model.states[i], origin + "/sojourn");
        const json& crow = member(cost, model.states[i], origin + "/cost");
        for (int a = 0; a < model.num_actions(i); ++a) {
            const std::string& aname = model.actions[i][a];
            const std::string tpath = origin + "/transition/" + model.states[i] + "/" + aname;
            const json& probs = member(trow, aname, origin + "/transition/" + model.states[i]);
            if (!probs.is_array() || static_cast<int>(probs.size()) != S)
                fail(tpath, "expected an array of " + std::to_string(S) + " probabilities");
            std::vector<double> row;
            for (std::size_t j = 0; j < probs.size(); ++j)
                row.push_back(number(probs[j], tpath + "/" + std::to_string(j)));
            model.transition[i].push_back(std::move(row));

            const std::string spath = origin + "/sojourn/" + model.states[i] + "/" + aname;
            const json& dist = member(srow, aname, origin + "/sojourn/" + model.states[i]);
            std::vector<SojournDist> laws;
            if (dist.is_array()) {
                if (static_cast<int>(dist.size()) != S)
                    fail(spath, "per-destination sojourn list must have " + std::to_string(S) + " entries");
                for (int j = 0; j < S; ++j)
                    laws.push_back(parse_sojourn(dist[j], spath + "/" + std::to_string(j)));
            } else {
                laws.assign(S, parse_sojourn(dist, spath));
            }
            model.sojourn[i].push_back(std::move(laws));

            const std::string cpath = origin + "/cost/" + model.states[i] + "/" + aname;
            model.cost[i].push_back(number(member(crow, aname, origin + "/cost/" + model.states[i]), cpath));
        }
    }

    model.c_bar = number(member(doc, "c_bar", origin), origin + "/c_bar");
    model.alpha = number(member(doc, "alpha", origin), origin + "/alpha");

    if (doc.contains("utility")) file.utility = parse_utility(doc["utility"], origin + "/utility");
    return file;
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_json(buf.str(), path);
}

std::string model_to_json(const SmdpModel& model, const std::optional<Utility>& utility) {
    ordered_json doc;
    doc["states"] = model.states;
    doc["actions"] = ordered_json::object();
    for (int i = 0; i < model.num_states(); ++i) doc["actions"][model.states[i]] = model.actions[i];
    doc["transition"] = ordered_json::object();
    doc["sojourn"] = ordered_json::object();
    doc["cost"] = ordered_json::object();
    for (int i = 0; i < model.num_states(); ++i) {
        ordered_json trow, srow, crow;
        for (int a = 0; a < model.num_actions(i); ++a) {
            trow[model.actions[i][a]] = model.transition[i][a];
            ordered_json laws = ordered_json::array();
            for (int j = 0; j < model.num_states(); ++j) {
                ordered_json one;
                sojourn_to_json(model.sojourn[i][a][j], one);
                laws.push_back(std::move(one));
            }
            srow[model.actions[i][a]] = std::move(laws);
            crow[model.actions[i][a]] = model.cost[i][a];
        }
        doc["transition"][model.states[i]] = std::move(trow);
        doc["sojourn"][model.states[i]] = std::move(srow);
        doc["cost"][model.states[i]] = std::move(crow);
    }
    doc["c_bar"] = model.c_bar;
    doc["alpha"] = model.alpha;
    if (utility) {
        ordered_json u;
        switch (utility->kind()) {
            case UtilityKind::linear: u["kind"] = "linear"; break;
            case UtilityKind::log1p: u["kind"] = "log1p"; break;
            case UtilityKind::exponential:
                u["kind"] = "exponential";
                u["gamma"] = utility->gamma();
                break;
            case UtilityKind::power:
                u["kind"] = "power";
                u["p"] = utility->power_exponent();
                if (utility->power_exponent() < 1) u["eta"] = utility->power_shift();
                break;
        }
        doc["utility"] = std::move(u);
    }
    return doc.dump();
}

std::uint64_t model_hash(const SmdpModel& model, const std::optional<Utility>& utility) {
    const std::string canon = model_to_json(model, utility);
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Utility parse_utility_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("utility: ") + e.what());
    }
    return parse_utility(doc, "utility");
}

Utility parse_utility_spec(const std::string& spec) {
    if (spec == "linear") return Utility::linear();
    if (spec == "log1p") return Utility::log1p();
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    try {
        if (head == "exp" || head == "exponential") {
            if (colon == std::string::npos) throw ParseError("utility spec: exp needs a gamma, e.g. exp:1.0");
            return Utility::exponential(std::stod(spec.substr(colon + 1)));
        }
        if (head == "power") {
            if (colon == std::string::npos) throw ParseError("utility spec: power needs an exponent, e.g. power:2");
            const std::string rest = spec.substr(colon + 1);
            const auto colon2 = rest.find(':');
            if (colon2 == std::string::npos) return Utility::power(std::stod(rest));
            return Utility::power(std::stod(rest.substr(0, colon2)), std::stod(rest.substr(colon2 + 1)));
        }
    } catch (const std::invalid_argument&) {
        throw ParseError("utility spec: cannot parse '" + spec + "'");
    }
    throw ParseError("utility spec: unknown kind '" + spec + "'");
}

void write_value_csv(const std::string& path, const ValueTable& table,
                     const std::vector<std::string>& states, const OutputMeta& meta) {
    auto out = open_out(path);
    write_meta_header(out, meta);
    out << "state,w,lambda,value\n";
    for (int i = 0; i < table.n_states; ++i)
        for (int wi = 0; wi < table.grid.W(); ++wi)
            for (int li = 0; li < table.grid.L(); ++li)
                out << states[i] << ',' << table.grid.w_nodes[wi] << ',' << table.grid.lam_nodes[li]
                    << ',' << table.at(i, wi, li) << '\n';
}

void write_htable_csv(const std::string& path, const HTable& h,
                      const std::vector<std::string>& states, const OutputMeta& meta) {
    auto out = open_out(path);
    write_meta_header(out, meta);
    out << "state,w,h\n";
    for (int i = 0; i < h.n_states; ++i)
        for (std::size_t wi = 0; wi < h.w_nodes.size(); ++wi)
            out << states[i] << ',' << h.w_nodes[wi] << ',' << h.h(i, static_cast<int>(wi)) << '\n';
}

void write_convergence_csv(const std::string& path, const std::vector<IterationRecord>& history,
                           const OutputMeta& meta) {
    auto out = open_out(path);
    write_meta_header(out, meta);
    out << "n,gap,bound\n";
    for (const auto& rec : history) out << rec.n << ',' << rec.gap << ',' << rec.bound << '\n';
}

void write_policy_json(const std::string& path, const std::vector<PolicyTable>& tables,
                       bool stationary, const OutputMeta& meta) {
    if (tables.empty()) throw std::invalid_argument("write_policy_json: no tables");
    ordered_json doc;
    doc["format"] = "smdp-risk-policy";
    doc["meta"] = meta_to_json(meta);
    doc["kind"] = stationary ? "stationary" : "markov";
    doc["n_states"] = tables.front().n_states;
    doc["grid"] = {{"w_nodes", tables.front().grid.w_nodes},
                   {"lam_nodes", tables.front().grid.lam_nodes}};
    doc["tables"] = ordered_json::array();
    for (const auto& table : tables) {
        ordered_json choice = ordered_json::array();
        for (int i = 0; i < table.n_states; ++i) {
            ordered_json per_state = ordered_json::array();
            for (int wi = 0; wi < table.grid.W(); ++wi) {
                std::vector<int> row(table.grid.L());
                for (int li = 0; li < table.grid.L(); ++li) row[li] = table.at(i, wi, li);
                per_state.push_back(row);
            }
            choice.push_back(std::move(per_state));
        }
        doc["tables"].push_back({{"choice", std::move(choice)}});
    }
    auto out = open_out(path);
    out << doc.dump(1, '\t') << '\n';
}

PolicyFile read_policy_json(const std::string& path, const SmdpModel& model) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (member(doc, "format", path).get<std::string>() != "smdp-risk-policy")
        fail(path + "/format", "not a policy file");

    PolicyFile file;
    file.stationary = member(doc, "kind", path).get<std::string>() == "stationary";
    const json& meta = member(doc, "meta", path);
    file.model_hash = std::stoull(member(meta, "model_hash", path + "/meta").get<std::string>(), nullptr, 16);

    AugGrid grid;
    const json& gj = member(doc, "grid", path);
    grid.w_nodes = member(gj, "w_nodes", path + "/grid").get<std::vector<double>>();
    grid.lam_nodes = member(gj, "lam_nodes", path + "/grid").get<std::vector<double>>();
    grid.log_w.resize(grid.w_nodes.size());
    for (std::size_t k = 0; k < grid.w_nodes.size(); ++k) grid.log_w[k] = std::log(grid.w_nodes[k]);

    const int n_states = member(doc, "n_states", path).get<int>();
    if (n_states != model.num_states()) fail(path + "/n_states", "state count does not match the model");

    for (const auto& tj : member(doc, "tables", path)) {
        PolicyTable table;
        table.grid = grid;
        table.n_states = n_states;
        table.choice.resize(static_cast<std::size_t>(n_states) * grid.W() * grid.L());
        const json& choice = member(tj, "choice", path + "/tables");
        if (static_cast<int>(choice.size()) != n_states) fail(path, "choice has wrong state count");
        for (int i = 0; i < n_states; ++i) {
            if (static_cast<int>(choice[i].size()) != grid.W()) fail(path, "choice has wrong w count");
            for (int wi = 0; wi < grid.W(); ++wi) {
                const auto row = choice[i][wi].get<std::vector<int>>();
                if (static_cast<int>(row.size()) != grid.L()) fail(path, "choice has wrong lambda count");
                for (int li = 0; li < grid.L(); ++li) {
                    if (row[li] < 0 || row[li] >= model.num_actions(i))
                        fail(path, "action index out of range for state " + model.states[i]);
                    table.at(i, wi, li) = row[li];
                }
            }
        }
        file.tables.push_back(std::move(table));
    }
    if (file.tables.empty()) fail(path + "/tables", "no tables");
    return file;
}

void write_simulation_csv(const std::string& path, const std::vector<double>& u_values,
                          const std::vector<double>& u_bracket_hi, const OutputMeta& meta) {
    auto out = open_out(path);
    write_meta_header(out, meta);
    if (u_bracket_hi.empty()) {
        out << "traj,u_of_c\n";
        for (std::size_t k = 0; k < u_values.size(); ++k) out << k << ',' << u_values[k] << '\n';
    } else {
        out << "traj,u_of_c,u_bracket_hi\n";
        for (std::size_t k = 0; k < u_values.size(); ++k)
            out << k << ',' << u_values[k] << ',' << u_bracket_hi[k] << '\n';
    }
}

} // namespace smdp
