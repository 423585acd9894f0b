#include "fazseg/report.hpp"

#include <charconv>
#include <cmath>

namespace fazseg::report {

std::string format_number(double value)
{
    if (std::isnan(value))
        return "nan";
    if (value == 0.0)
        value = 0.0; // drops the sign of -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text)
{
    if (text.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string measurement_header()
{
    std::string out;
    for (std::size_t i = 0; i < kMeasurementColumns.size(); ++i) {
        if (i)
            out += ',';
        out += kMeasurementColumns[i];
    }
    return out + "\n";
}

std::string measurement_row(std::string_view filename, const FazMeasurements& m)
{
    const double values[] = {m.area,         m.diameter,            m.major_axis,
                             m.minor_axis,   m.perimeter,           m.eccentricity,
                             m.f_min,        m.f_max,               m.inner_circle_radius,
                             m.circumcircle_radius, m.orientation,  m.tortuosity,
                             m.vad,          m.vdi,                 m.circularity};
    std::string out = csv_field(filename);
    for (double v : values)
        out += "," + format_number(v);
    return out + "\n";
}

std::string validation_header()
{
    std::string out = "filename,dsc,ssim,area_ratio,label";
    for (auto metric : kSeriesMetrics) {
        out += ",";
        out += metric;
        out += "_pearson_r,";
        out += metric;
        out += "_ba_bias";
    }
    return out + "\n";
}

std::string validation_row(const ValidationRow& row)
{
    const auto& a = row.agreement;
    std::string out = csv_field(row.filename) + "," + format_number(a.dsc) + "," +
                      format_number(a.ssim) + "," + format_number(a.area_ratio) + "," +
                      std::string(label_name(a.label));
    return out + ",,,,,,\n";
}

std::string validation_footer(const ValidationSummary& s)
{
    std::string out = "summary," + format_number(s.mean_dsc) + "," + format_number(s.mean_ssim) +
                      ",," + format_number(s.optimal_fraction);
    for (const auto& series : s.series) {
        if (series)
            out += "," + format_number(series->pearson_r) + "," + format_number(series->bias);
        else
            out += ",,";
    }
    return out + "\n";
}

std::string bland_altman_csv(const ValidationSummary& s, const std::vector<std::string>& filenames)
{
    std::string out = "metric,filename,mean,diff\n";
    for (std::size_t m = 0; m < s.series.size(); ++m) {
        if (!s.series[m])
            continue;
        const auto& pts = s.series[m]->points;
        for (std::size_t i = 0; i < pts.size() && i < filenames.size(); ++i)
            out += std::string(kSeriesMetrics[m]) + "," + csv_field(filenames[i]) + "," +
                   format_number(pts[i].mean) + "," + format_number(pts[i].diff) + "\n";
    }
    return out;
}

} // namespace fazseg::report
