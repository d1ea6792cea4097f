#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tradesbm/netbuild.hpp"
#include "tradesbm/sbm.hpp"

// On-disk artifacts shared by the pipeline stages.
namespace tradesbm::io {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// `<stem>.csv` holds `year,src,dst,weight` rows (17 significant digits);
// `<stem>.json` holds universe order, years, presence mask, row totals,
// cutoff and the digest of the input the network was built from.
void write_network(const std::filesystem::path& stem, const TemporalNetwork& net);
TemporalNetwork read_network(const std::filesystem::path& stem);

// Model parameters, labels as a year x country table, bound trace, ICL,
// seed and input digest. Variational marginals are not stored.
void write_fit(const std::filesystem::path& path, const sbm::FitResult& result, const TemporalNetwork& net);
sbm::FitResult read_fit(const std::filesystem::path& path, const TemporalNetwork& net);

// year,country,cluster,present
void write_labels_csv(const std::filesystem::path& path, const Matrix<int>& labels, const TemporalNetwork& net);

}  // namespace tradesbm::io
