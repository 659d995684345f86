#include "fermi/series.hpp"

#include <algorithm>

#include "fermi/errors.hpp"

namespace fermi {

ObservableSeries::ObservableSeries(std::vector<std::string> column_names)
    : names_(std::move(column_names)), columns_(names_.size()) {}

void ObservableSeries::append(double t, std::span<const double> row) {
    if (row.size() != names_.size()) throw InvalidParameter("series row width does not match column count");
    if (!times_.empty() && !(t > times_.back())) throw InvalidParameter("series times must strictly increase");
    times_.push_back(t);
    for (std::size_t c = 0; c < row.size(); ++c) columns_[c].push_back(row[c]);
}

bool ObservableSeries::has_column(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& ObservableSeries::column(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InvalidParameter("unknown series column '" + name + "'");
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

}  // namespace fermi
