#pragma once

#include <json.hpp>

#include "clams/meta.hpp"
#include "clams/search.hpp"
#include "clams/stats.hpp"

namespace clams {

using Json = nlohmann::json;

Json pipeline_to_json(const Pipeline& p);
Pipeline pipeline_from_json(const Json& j);

Json search_result_to_json(const SearchResult& r);

Json point_cloud_to_json(const PointCloud& pc);
PointCloud point_cloud_from_json(const Json& j);

Json meta_entry_to_json(const MetaEntry& e);
MetaEntry meta_entry_from_json(const Json& j);

Json recommendation_to_json(const Recommendation& r);

Json rope_to_json(const RopePosterior& p);

// history CSV: pipeline-json, score, duration_ms, status
std::string history_to_csv(const SearchResult& r);

void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace clams
