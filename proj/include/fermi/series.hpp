#ifndef FERMI_SERIES_HPP
#define FERMI_SERIES_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fermi {

/// Time-stamped scalar records with a fixed, ordered set of named columns.
class ObservableSeries {
public:
    ObservableSeries() = default;
    explicit ObservableSeries(std::vector<std::string> column_names);

    /// Appends one row. Throws InvalidParameter if t does not strictly increase
    /// or the row width differs from the column count.
    void append(double t, std::span<const double> row);
    void append(double t, std::initializer_list<double> row) { append(t, std::span<const double>(row.begin(), row.size())); }

    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<std::string>& column_names() const noexcept { return names_; }

    bool has_column(const std::string& name) const;
    /// Throws InvalidParameter for unknown names.
    const std::vector<double>& column(const std::string& name) const;

private:
    std::vector<std::string> names_;
    std::vector<double> times_;
    std::vector<std::vector<double>> columns_;
};

}  // namespace fermi

#endif  // FERMI_SERIES_HPP
