#include "vowelrec/model_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "vowelrec/error.hpp"

using nlohmann::json;

namespace vowelrec {

json to_json(const HmmModel& model) {
    json emissions = json::array();
    for (const auto& em : model.emissions) {
        json means = json::array(), variances = json::array();
        for (const auto& c : em.components) {
            means.push_back(c.mean);
            variances.push_back(c.variance);
        }
        emissions.push_back({{"weights", em.weights}, {"means", means}, {"variances", variances}});
    }
    return {{"label", model.class_label},
            {"dim", model.dim},
            {"pi", model.pi},
            {"trans", model.trans},
            {"emissions", emissions}};
}

HmmModel model_from_json(const json& j) {
    try {
        HmmModel m;
        m.class_label = j.at("label").get<std::string>();
        m.dim = j.at("dim").get<std::size_t>();
        m.pi = j.at("pi").get<std::vector<double>>();
        m.trans = j.at("trans").get<std::vector<std::vector<double>>>();
        for (const auto& e : j.at("emissions")) {
            GmmEmission em;
            em.weights = e.at("weights").get<std::vector<double>>();
            const auto means = e.at("means").get<std::vector<std::vector<double>>>();
            const auto vars = e.at("variances").get<std::vector<std::vector<double>>>();
            if (means.size() != vars.size() || means.size() != em.weights.size())
                throw Error(ErrorKind::Format, "emission arrays differ in length");
            for (std::size_t i = 0; i < means.size(); ++i) em.components.emplace_back(means[i], vars[i]);
            m.emissions.push_back(std::move(em));
        }
        validate(m);
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, fmt::format("invalid model JSON: {}", e.what()));
    } catch (const Error& e) {
        throw Error(ErrorKind::Format, fmt::format("invalid model JSON: {}", e.what()));
    }
}

json to_json(const ModelSet& set) {
    json classes = json::array();
    for (const auto& m : set.models) classes.push_back(to_json(m));
    return {{"format", "vowelrec-hmm-set/1"}, {"config", set.config}, {"subset", set.subset}, {"classes", classes}};
}

ModelSet model_set_from_json(const json& j) {
    try {
        ModelSet set;
        set.config = j.value("config", json::object());
        set.subset = j.value("subset", std::vector<std::size_t>{});
        for (const auto& c : j.at("classes")) set.models.push_back(model_from_json(c));
        if (set.models.empty()) throw Error(ErrorKind::Format, "model set has no classes");
        return set;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, fmt::format("invalid model set JSON: {}", e.what()));
    }
}

void save_model_set(const std::filesystem::path& path, const ModelSet& set) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
    out << to_json(set).dump(2) << '\n';
}

ModelSet load_model_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, fmt::format("{}: {}", path.string(), e.what()));
    }
    return model_set_from_json(j);
}

}  // namespace vowelrec
