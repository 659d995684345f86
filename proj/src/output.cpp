#include "fermi/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fermi/errors.hpp"

namespace fermi {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

double raster_max(const Raster& raster) { return raster.values.size() > 0 ? raster.values.maxCoeff() : 0.0; }

}  // namespace

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw InvalidParameter("csv header and column count differ");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) throw InvalidParameter("csv columns differ in length");
    }
    auto out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_real(columns[c][r]);
        out << '\n';
    }
}

void write_series_csv(const std::filesystem::path& path, const ObservableSeries& series) {
    std::vector<std::string> header{"t"};
    std::vector<std::vector<double>> columns{series.times()};
    for (const auto& name : series.column_names()) {
        header.push_back(name);
        columns.push_back(series.column(name));
    }
    write_csv(path, header, columns);
}

void write_marginal_csv(const std::filesystem::path& path, const Marginal& marginal) {
    const std::string axis = marginal.axis == Axis::Position ? "z" : "p";
    std::vector<double> x(marginal.bin_centers.begin(), marginal.bin_centers.end());
    std::vector<double> rho(marginal.density.begin(), marginal.density.end());
    write_csv(path, {axis, "density"}, {x, rho});
}

void write_spikes_csv(const std::filesystem::path& path, const SpikeReport& report) {
    std::vector<double> loc, height, ratio, background;
    for (const Spike& s : report.peaks) {
        loc.push_back(s.location);
        height.push_back(s.height);
        ratio.push_back(s.background_ratio);
        background.push_back(report.background_level);
    }
    write_csv(path, {"location", "height", "background_ratio", "background_level"}, {loc, height, ratio, background});
}

void write_windows_csv(const std::filesystem::path& path, const std::vector<Window>& windows, double lambda) {
    auto out = open_out(path);
    out << "kind,s,lo,hi,empty,contains_lambda\n";
    for (const Window& w : windows) {
        out << to_string(w.kind) << ',' << (w.s ? format_real(w.s->value()) : std::string()) << ',' << format_real(w.lo)
            << ',' << format_real(w.hi) << ',' << (w.empty() ? 1 : 0) << ',' << (w.contains(lambda) ? 1 : 0) << '\n';
    }
}

void write_raster_pgm(const std::filesystem::path& path, const Raster& raster) {
    const auto width = raster.values.cols();
    const auto height = raster.values.rows();
    const double peak = raster_max(raster);
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "P5\n" << width << ' ' << height << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(2 * width));
    for (Eigen::Index r = height - 1; r >= 0; --r) {
        for (Eigen::Index c = 0; c < width; ++c) {
            const double scaled = peak > 0.0 ? raster.values(r, c) / peak * 65535.0 : 0.0;
            const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(scaled, 0.0, 65535.0)));
            row[static_cast<std::size_t>(2 * c)] = static_cast<unsigned char>(v >> 8);
            row[static_cast<std::size_t>(2 * c + 1)] = static_cast<unsigned char>(v & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

void write_raster_axes(const std::filesystem::path& path, const Raster& raster) {
    auto out = open_out(path);
    out << "axis,index,value\n";
    for (Eigen::Index i = 0; i < raster.t_axis.size(); ++i) out << "t," << i << ',' << format_real(raster.t_axis[i]) << '\n';
    for (Eigen::Index i = 0; i < raster.z_axis.size(); ++i) out << "z," << i << ',' << format_real(raster.z_axis[i]) << '\n';
    out << "scale,0," << format_real(raster_max(raster)) << '\n';
}

Pgm16 read_pgm16(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::string magic;
    int maxval = 0;
    Pgm16 img;
    in >> magic >> img.width >> img.height >> maxval;
    in.get();
    if (magic != "P5" || maxval != 65535 || img.width < 0 || img.height < 0) throw Error("not a 16-bit P5 file");
    std::vector<unsigned char> bytes(static_cast<std::size_t>(2 * img.width * img.height));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw Error("truncated PGM data");
    img.samples.resize(bytes.size() / 2);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        img.samples[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
    return img;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

}  // namespace fermi
