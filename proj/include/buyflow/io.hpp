#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "buyflow/datastore.hpp"

namespace buyflow::io {

std::vector<PurchaseEvent> read_events(const std::filesystem::path& path);
std::vector<PurchaseEvent> parse_events(std::istream& in, const std::string& source);
void write_events(std::ostream& out, std::span<const PurchaseEvent> events);
std::string event_to_json(const PurchaseEvent& event);

std::vector<UserProfile> read_profiles(const std::filesystem::path& path);
void write_profiles(std::ostream& out, std::span<const UserProfile> profiles);

// zip,median_income_usd. Duplicate zips are an error.
ZipIncomeTable read_zip_income(const std::filesystem::path& path);
// zip,utc_offset_minutes
ZipTimezoneTable read_zip_timezones(const std::filesystem::path& path);

std::vector<EdgeRecord> read_edges(const std::filesystem::path& path);
void write_edges(std::ostream& out, std::span<const EdgeRecord> edges);

Taxonomy read_taxonomy(const std::filesystem::path& path);
void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy);

// A dataset directory holds events.jsonl, profiles.csv and optionally
// zip_income.csv, zip_timezone.csv, edges.csv and taxonomy.csv.
struct DataDir {
  IngestResult ingest;
  std::vector<EdgeRecord> edges;
  ZipIncomeTable zip_income;
  ZipTimezoneTable zip_timezones;
  bool has_income = false;
  bool has_graph = false;
};

DataDir load_data_dir(const std::filesystem::path& dir, const IngestOptions& options = {});

}  // namespace buyflow::io
