#ifndef FERMI_OUTPUT_HPP
#define FERMI_OUTPUT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fermi/model.hpp"
#include "fermi/observables.hpp"
#include "fermi/series.hpp"

namespace fermi {

/// Shortest text that is guaranteed to read back bit-exactly (17 significant digits).
std::string format_real(double value);

/// Column-oriented CSV with a header row; every column must have the same length.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Header: t, then the series columns in order.
void write_series_csv(const std::filesystem::path& path, const ObservableSeries& series);

/// Header: z,density or p,density.
void write_marginal_csv(const std::filesystem::path& path, const Marginal& marginal);

/// Header: location,height,background_ratio,background_level.
void write_spikes_csv(const std::filesystem::path& path, const SpikeReport& report);

/// Header: kind,s,lo,hi,empty,contains_lambda. `s` is blank for the localization window.
void write_windows_csv(const std::filesystem::path& path, const std::vector<Window>& windows, double lambda);

/// Binary PGM (P5), 16-bit big-endian, maxval 65535. Columns are time, rows are z with the
/// highest z in the first row; values are scaled by the raster maximum.
void write_raster_pgm(const std::filesystem::path& path, const Raster& raster);

/// Header: axis,index,value with axis in {t, z, scale}; `scale` is the density mapped to 65535.
void write_raster_axes(const std::filesystem::path& path, const Raster& raster);

/// Reads a P5 16-bit file back (width, height, samples in file order).
struct Pgm16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};
Pgm16 read_pgm16(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fermi

#endif  // FERMI_OUTPUT_HPP
