#include "mwalk/membrane.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mwalk/errors.hpp"

namespace mwalk {

using nlohmann::json;

namespace {

void check_known_keys(const json& obj, std::initializer_list<const char*> known,
                      const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ParseError("unknown key \"" + it.key() + "\" in " + where);
    }
}

Side parse_side(const std::string& s, const std::string& where) {
    if (s == "L") return Side::Left;
    if (s == "R") return Side::Right;
    throw ParseError("bad side \"" + s + "\" in " + where + ", expected \"L\" or \"R\"");
}

} // namespace

ValidatedMembrane::ValidatedMembrane(MembraneSpec spec) : spec_(std::move(spec)) {
    if (spec_.m < 2)
        throw BadDimension("membrane dimension must be >= 2, got " + std::to_string(spec_.m));
    if (spec_.periods.size() != static_cast<size_t>(spec_.m - 1))
        throw BadDimension("expected " + std::to_string(spec_.m - 1) + " periods, got " +
                           std::to_string(spec_.periods.size()));
    lattice_ = PeriodLattice(spec_.periods);
    const size_t u = lattice_.size();
    const size_t dims = lattice_.dims();

    for (int s = 0; s < 2; ++s) {
        if (spec_.kernel[s].size() != u)
            throw EmptyKernelEntry("kernel side " + std::string(s ? "R" : "L") + " has " +
                                   std::to_string(spec_.kernel[s].size()) + " entries, expected " +
                                   std::to_string(u));
        mean_slide_[s].resize(u);
        exit_right_[s].resize(u);
        exit_class_[s].resize(u);
        cumulative_[s].resize(u);
        for (size_t j = 0; j < u; ++j) {
            const auto& moves = spec_.kernel[s][j];
            const std::string where =
                "kernel entry (" + std::string(s ? "R" : "L") + "," + lattice_.class_name(j) + ")";
            if (moves.empty()) throw EmptyKernelEntry(where + " has no moves");
            double total = 0.0, qright = 0.0;
            std::vector<double> mean(dims, 0.0);
            for (const Move& mv : moves) {
                if (mv.slide.size() != dims)
                    throw DimensionMismatch(where + ": slide has " +
                                            std::to_string(mv.slide.size()) +
                                            " coordinates, expected " + std::to_string(dims));
                if (mv.prob < 0.0)
                    throw ProbabilitySumError(where + ": negative move probability");
                total += mv.prob;
                if (mv.exit == Side::Right) qright += mv.prob;
                for (size_t i = 0; i < dims; ++i)
                    mean[i] += mv.prob * static_cast<double>(mv.slide[i]);
                for (int64_t d : mv.slide) has_slides_ = has_slides_ || d != 0;
                exit_class_[s][j].push_back(lattice_.shift(j, mv.slide));
                cumulative_[s][j].push_back(total);
            }
            if (std::abs(total - 1.0) > 1e-12)
                throw ProbabilitySumError(where + ": move probabilities sum to " +
                                          std::to_string(total));
            // pin the last cumulative bucket so sampling cannot fall off the end
            cumulative_[s][j].back() = 1.0;
            mean_slide_[s][j] = std::move(mean);
            exit_right_[s][j] = qright;
        }
    }
}

ValidatedMembrane validate(const MembraneSpec& spec) { return ValidatedMembrane(spec); }

std::vector<double> mean_slide(const MembraneSpec& spec, Side side, size_t class_index) {
    ValidatedMembrane v(spec);
    return v.mean_slide(side, class_index);
}

MembraneSpec builtin_fig1a(double p) {
    MembraneSpec s;
    s.m = 2;
    s.periods = {2};
    s.kernel[0].resize(2);
    s.kernel[1].resize(2);
    // arrivals from the left: cross at even classes with probability p,
    // otherwise reflect and slide one site down; odd classes swap p and 1-p
    s.kernel[0][0] = {{Side::Right, {0}, p}, {Side::Left, {-1}, 1.0 - p}};
    s.kernel[0][1] = {{Side::Right, {0}, 1.0 - p}, {Side::Left, {-1}, p}};
    // arrivals from the right: even classes reflect in place, odd classes cross
    s.kernel[1][0] = {{Side::Right, {0}, 1.0}};
    s.kernel[1][1] = {{Side::Left, {0}, 1.0}};
    return s;
}

MembraneSpec builtin_fig1b(double p) { return builtin_fig1a(1.0 - p); }

MembraneSpec builtin_homogeneous(double p_left, double p_right) {
    MembraneSpec s;
    s.m = 2;
    s.periods = {1};
    s.kernel[0].resize(1);
    s.kernel[1].resize(1);
    s.kernel[0][0] = {{Side::Right, {0}, p_left}, {Side::Left, {0}, 1.0 - p_left}};
    s.kernel[1][0] = {{Side::Right, {0}, p_right}, {Side::Left, {0}, 1.0 - p_right}};
    return s;
}

MembraneSpec builtin_transparent(int m) {
    MembraneSpec s;
    s.m = m;
    s.periods.assign(size_t(m - 1), 1);
    s.kernel[0].resize(1);
    s.kernel[1].resize(1);
    Coords zero(size_t(m - 1), 0);
    s.kernel[0][0] = {{Side::Right, zero, 1.0}};
    s.kernel[1][0] = {{Side::Left, zero, 1.0}};
    return s;
}

MembraneSpec builtin_membrane(const std::string& name) {
    auto colon = name.find(':');
    std::string base = name.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : name.substr(colon + 1);
    auto parse_reals = [&](size_t want) {
        std::vector<double> out;
        std::stringstream ss(args);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                size_t pos = 0;
                out.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw UnknownBuiltin("bad parameter \"" + tok + "\" in builtin \"" + name + "\"");
            }
        }
        if (out.size() != want)
            throw UnknownBuiltin("builtin \"" + base + "\" takes " + std::to_string(want) +
                                 " parameter(s), got " + std::to_string(out.size()));
        for (double v : out)
            if (!(v >= 0.0 && v <= 1.0))
                throw UnknownBuiltin("builtin \"" + name + "\": parameters must lie in [0,1]");
        return out;
    };
    if (base == "fig1a") return builtin_fig1a(parse_reals(1)[0]);
    if (base == "fig1b") return builtin_fig1b(parse_reals(1)[0]);
    if (base == "homogeneous") {
        auto v = parse_reals(2);
        return builtin_homogeneous(v[0], v[1]);
    }
    if (base == "transparent") {
        if (!args.empty()) throw UnknownBuiltin("builtin \"transparent\" takes no parameters");
        return builtin_transparent();
    }
    throw UnknownBuiltin("unknown builtin membrane \"" + base + "\"");
}

MembraneSpec membrane_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("membrane spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("membrane spec must be a JSON object");
    check_known_keys(doc, {"m", "periods", "kernel"}, "membrane spec");
    if (!doc.contains("m") || !doc.contains("periods") || !doc.contains("kernel"))
        throw ParseError("membrane spec requires keys \"m\", \"periods\", \"kernel\"");

    MembraneSpec spec;
    spec.m = doc.at("m").get<int>();
    if (spec.m < 2) throw BadDimension("membrane dimension must be >= 2");
    spec.periods = doc.at("periods").get<std::vector<int>>();
    PeriodLattice lattice(spec.periods); // validates periods early
    if (spec.periods.size() != static_cast<size_t>(spec.m - 1))
        throw BadDimension("expected " + std::to_string(spec.m - 1) + " periods");

    const size_t u = lattice.size();
    spec.kernel[0].resize(u);
    spec.kernel[1].resize(u);
    std::set<std::pair<int, size_t>> seen;
    for (const json& ent : doc.at("kernel")) {
        check_known_keys(ent, {"side", "class", "moves"}, "kernel entry");
        Side side = parse_side(ent.at("side").get<std::string>(), "kernel entry");
        std::vector<int> cls = ent.at("class").get<std::vector<int>>();
        if (cls.size() != spec.periods.size())
            throw DimensionMismatch("kernel entry class has wrong length");
        for (size_t i = 0; i < cls.size(); ++i)
            if (cls[i] < 0 || cls[i] >= spec.periods[i])
                throw ParseError("kernel entry class out of range");
        size_t j = lattice.linear(cls);
        if (!seen.insert({static_cast<int>(side), j}).second)
            throw ParseError("duplicate kernel entry for (" +
                             std::string(side_name(side)) + "," + lattice.class_name(j) + ")");
        std::vector<Move> moves;
        for (const json& mv : ent.at("moves")) {
            check_known_keys(mv, {"exit", "slide", "prob"}, "kernel move");
            Move m;
            m.exit = parse_side(mv.at("exit").get<std::string>(), "kernel move");
            m.slide = mv.at("slide").get<Coords>();
            m.prob = mv.at("prob").get<double>();
            moves.push_back(std::move(m));
        }
        spec.kernel[static_cast<int>(side)][j] = std::move(moves);
    }
    for (int s = 0; s < 2; ++s)
        for (size_t j = 0; j < u; ++j)
            if (spec.kernel[s][j].empty())
                throw EmptyKernelEntry("missing kernel entry (" + std::string(s ? "R" : "L") +
                                       "," + lattice.class_name(j) + ")");
    return spec;
}

MembraneSpec load_membrane_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open membrane spec file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return membrane_from_json_text(buf.str());
}

std::string membrane_to_json_text(const MembraneSpec& spec) {
    json doc;
    doc["m"] = spec.m;
    doc["periods"] = spec.periods;
    PeriodLattice lattice(spec.periods);
    json kernel = json::array();
    for (int s = 0; s < 2; ++s) {
        for (size_t j = 0; j < spec.kernel[s].size(); ++j) {
            json ent;
            ent["side"] = s ? "R" : "L";
            ent["class"] = lattice.tuple(j);
            json moves = json::array();
            for (const Move& m : spec.kernel[s][j]) {
                json mv;
                mv["exit"] = side_name(m.exit);
                mv["slide"] = m.slide;
                mv["prob"] = m.prob;
                moves.push_back(mv);
            }
            ent["moves"] = moves;
            kernel.push_back(ent);
        }
    }
    doc["kernel"] = kernel;
    return doc.dump(2);
}

OneSidedEnvironment OneSidedEnvironment::periodic(int m, std::vector<int> periods,
                                                  std::vector<double> table) {
    if (m < 2) throw BadDimension("environment dimension must be >= 2");
    OneSidedEnvironment env;
    env.m_ = m;
    env.iid_ = false;
    env.lattice_ = PeriodLattice(std::move(periods));
    if (env.lattice_.dims() != static_cast<size_t>(m - 1))
        throw BadDimension("environment periods do not match dimension");
    if (table.size() != env.lattice_.size())
        throw DimensionMismatch("environment table has " + std::to_string(table.size()) +
                                " entries, cell has " + std::to_string(env.lattice_.size()));
    for (double p : table)
        if (!(p >= 0.0 && p <= 1.0))
            throw BadWeights("environment probabilities must lie in [0,1]");
    env.table_ = std::move(table);
    return env;
}

OneSidedEnvironment OneSidedEnvironment::iid(int m, std::vector<double> values,
                                             std::vector<double> weights, uint64_t seed) {
    if (m < 2) throw BadDimension("environment dimension must be >= 2");
    if (values.empty() || values.size() != weights.size())
        throw BadWeights("environment law needs matching nonempty values and weights");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw BadWeights("environment law weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw BadWeights("environment law weights must sum to 1");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0))
            throw BadWeights("environment probabilities must lie in [0,1]");
    OneSidedEnvironment env;
    env.m_ = m;
    env.iid_ = true;
    env.values_ = std::move(values);
    env.weights_ = std::move(weights);
    env.weight_cum_.resize(env.weights_.size());
    double c = 0.0;
    for (size_t i = 0; i < env.weights_.size(); ++i) {
        c += env.weights_[i];
        env.weight_cum_[i] = c;
    }
    env.weight_cum_.back() = 1.0;
    env.seed_ = seed;
    return env;
}

double OneSidedEnvironment::p(const Coords& y) const {
    if (y.size() != static_cast<size_t>(m_ - 1))
        throw DimensionMismatch("environment p(y): position has wrong length");
    if (!iid_) return table_[lattice_.class_of(y)];
    // deterministic field: hash (seed, y) into a uniform, then invert the law
    uint64_t h = mix64(seed_ ^ 0x51f8a3bd3c5c55a1ULL);
    for (int64_t c : y) h = mix64(h ^ static_cast<uint64_t>(c) * 0x9e3779b97f4a7c15ULL);
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    size_t i = 0;
    while (u >= weight_cum_[i]) ++i;
    return values_[i];
}

double OneSidedEnvironment::p_bar() const {
    if (!iid_) {
        double s = 0.0;
        for (double p : table_) s += p;
        return s / static_cast<double>(table_.size());
    }
    double s = 0.0;
    for (size_t i = 0; i < values_.size(); ++i) s += values_[i] * weights_[i];
    return s;
}

OneSidedEnvironment OneSidedEnvironment::fork(uint64_t stream_index) const {
    OneSidedEnvironment env = *this;
    if (iid_) env.seed_ = mix64(seed_ ^ mix64(stream_index + 0x0db3c28f961a3857ULL));
    return env;
}

OneSidedEnvironment environment_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("environment file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("type"))
        throw ParseError("environment file must be an object with a \"type\" key");
    std::string type = doc.at("type").get<std::string>();
    if (type == "periodic") {
        check_known_keys(doc, {"type", "m", "periods", "p"}, "periodic environment");
        int m = doc.value("m", 2);
        std::vector<double> table = doc.at("p").get<std::vector<double>>();
        std::vector<int> periods;
        if (doc.contains("periods")) {
            periods = doc.at("periods").get<std::vector<int>>();
        } else if (m == 2) {
            periods = {static_cast<int>(table.size())};
        } else {
            throw ParseError("periodic environment with m > 2 requires \"periods\"");
        }
        return OneSidedEnvironment::periodic(m, std::move(periods), std::move(table));
    }
    if (type == "iid") {
        check_known_keys(doc, {"type", "m", "law", "seed"}, "iid environment");
        int m = doc.value("m", 2);
        if (!doc.contains("law") || !doc.contains("seed"))
            throw ParseError("iid environment requires \"law\" and \"seed\"");
        const json& law = doc.at("law");
        check_known_keys(law, {"bernoulli_values", "weights"}, "environment law");
        return OneSidedEnvironment::iid(
            m, law.at("bernoulli_values").get<std::vector<double>>(),
            law.at("weights").get<std::vector<double>>(), doc.at("seed").get<uint64_t>());
    }
    throw ParseError("environment type must be \"periodic\" or \"iid\", got \"" + type + "\"");
}

OneSidedEnvironment load_environment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open environment file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return environment_from_json_text(buf.str());
}

} // namespace mwalk
