#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vowelrec/hmm.hpp"

namespace vowelrec {

/// A set of per-class models plus whatever configuration produced them.
/// `subset` holds the 1-based coefficient indices the models were trained
/// on (empty means all coefficients).
struct ModelSet {
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::size_t> subset;
    std::vector<HmmModel> models;
};

nlohmann::json to_json(const HmmModel& model);
HmmModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelSet& set);
ModelSet model_set_from_json(const nlohmann::json& j);

void save_model_set(const std::filesystem::path& path, const ModelSet& set);
ModelSet load_model_set(const std::filesystem::path& path);

}  // namespace vowelrec
