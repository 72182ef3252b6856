#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "bifurcate/discretize.hpp"

namespace bif {

using Json = nlohmann::json;

// Flat key-value configuration. Keys are "section.key"; lines before any
// section header land in section "run".
using RunConfig = std::map<std::string, std::string>;

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Entries of `flags` replace entries of `base`.
RunConfig merge_config(const RunConfig& base, const RunConfig& flags);
Json config_json(const RunConfig& c);

Json to_json(const Vec& v);
Json to_json(const ClassifyReport& r);
Json to_json(const VerifyReport& r);
Json to_json(const Frames& f);
Json to_json(const RecoveryResult& r);
Json to_json(const Certificate& c);
Json to_json(const TransferReport& t);
Json to_json(const StudyTable& t);
Json to_json(const TraceResult& t);

// Report envelope: schema 1, library version, embedded config.
Json make_report(const std::string& command, const RunConfig& config, Json result);
std::string dump_report(const Json& j);

std::string trace_csv(const TraceResult& t);

void write_file(const std::string& path, const std::string& content);

const char* library_version();

}  // namespace bif
