#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "bdecomp/copula.hpp"
#include "bdecomp/decomposition.hpp"
#include "bdecomp/density.hpp"
#include "bdecomp/grid.hpp"
#include "bdecomp/ingest.hpp"

namespace bdecomp::io {

using StringMap = std::map<std::string, std::string>;

// Density files ("bdecomp-density-v1"): format tag, grid (axes with name /
// points / weights), flat row-major values, optional string metadata map.
// Numbers are serialized as shortest round-trip decimals, objects with sorted
// keys, so identical inputs produce identical bytes.
std::string density_json(const Density& f, const StringMap& metadata = {});
void write_density(const std::filesystem::path& p, const Density& f,
                   const StringMap& metadata = {});
Density read_density(const std::filesystem::path& p, StringMap* metadata = nullptr);

// Clr-field files ("bdecomp-clr-v1"): same layout, real-valued entries.
// Reading revalidates the zero-sum constraint.
std::string clr_json(const ClrField& z, const StringMap& metadata = {});
void write_clr(const std::filesystem::path& p, const ClrField& z,
               const StringMap& metadata = {});
ClrField read_clr(const std::filesystem::path& p, StringMap* metadata = nullptr);

// Decomposition reports as JSON ("bdecomp-report-v1"), as an aligned text
// table, and as plot-ready TSV (one long-format file per component).
std::string report_json(const DecompositionReport& report);
std::string report_text(const DecompositionReport& report);
std::string component_tsv(const GridMeasure& m, IndexSet subset, const ClrField& field);

// Sample CSV: mandatory header row of variable names, then one observation
// per line, comma separated.
SampleMatrix read_sample_csv(const std::filesystem::path& p,
                             std::vector<std::string>* names = nullptr);

// Correlation matrix JSON: {"d": int, "rho": [[...], ...]}.
CorrelationMatrix read_correlation(const std::filesystem::path& p);

// Marginal table CSV: two columns x,F (optional header), strictly increasing.
MarginalTransform read_marginal_csv(const std::filesystem::path& p);
void write_marginal_csv(const std::filesystem::path& p, const MarginalTransform& t);

// Shortest round-trip decimal rendering used by all text outputs.
std::string format_double(double v);

}  // namespace bdecomp::io
