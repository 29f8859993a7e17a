#include "geocut/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace geocut {

PointCloud read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open points file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string scratch = line;
        std::replace(scratch.begin(), scratch.end(), ',', ' ');
        std::istringstream ss(scratch);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (row.empty()) {
            if (first) {
                first = false;
                continue;  // header line
            }
            throw error("bad points row: " + line);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw error("inconsistent column count in points file");
        rows.push_back(std::move(row));
        first = false;
    }
    if (rows.empty()) throw error("points file has no rows: " + path);
    PointCloud cloud;
    cloud.pts.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t a = 0; a < rows[i].size(); ++a)
            cloud.pts(static_cast<Index>(i), static_cast<Index>(a)) = rows[i][a];
    return cloud;
}

void write_points_csv(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw error("cannot write points file: " + path);
    for (int a = 0; a < cloud.dim(); ++a) out << (a ? ",x" : "x") << a + 1;
    out << "\n";
    for (Index i = 0; i < cloud.n(); ++i) {
        for (int a = 0; a < cloud.dim(); ++a) {
            if (a) out << ",";
            out << format_double(cloud.pts(i, a));
        }
        out << "\n";
    }
}

Partition read_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open partition file: " + path);
    Partition y;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '0')
            y.push_back(0);
        else if (line[0] == '1')
            y.push_back(1);
        else
            throw error("partition lines must be 0 or 1: " + line);
    }
    if (y.empty()) throw error("partition file has no rows: " + path);
    return y;
}

void write_partition(const std::string& path, const Partition& y) {
    std::ofstream out(path);
    if (!out) throw error("cannot write partition file: " + path);
    for (auto v : y) out << (v ? "1\n" : "0\n");
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace geocut
