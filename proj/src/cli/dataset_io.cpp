#include "rkm/cli/dataset_io.hpp"

#include "rkm/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace rkm::cli {
namespace {

static_assert(std::endian::native == std::endian::little, "binary dataset I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'R', 'K', 'M', '1'};

template <class T>
void put(std::ofstream& out, T value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path)
{
    T value;
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw IoError("truncated dataset file " + path);
    return value;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode)
{
    std::ofstream out(path, mode);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    return out;
}

void check_shape(const model::Dataset& data)
{
    if (static_cast<Eigen::Index>(data.labels.size()) != data.size())
        throw ValidationError("dataset: label count does not match points");
    if (data.dim() > std::numeric_limits<std::uint32_t>::max() || data.size() > std::numeric_limits<std::uint32_t>::max())
        throw ValidationError("dataset: too large for the 32-bit header");
}

} // namespace

void write_binary(const model::Dataset& data, const std::string& path)
{
    check_shape(data);
    auto out = open_out(path, std::ios::binary | std::ios::trunc);
    out.write(kMagic.data(), kMagic.size());
    put(out, static_cast<std::uint32_t>(data.dim()));
    put(out, static_cast<std::uint32_t>(data.size()));
    // Eigen stores column-major, so the buffer is already in file order.
    out.write(reinterpret_cast<const char*>(data.points.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(data.points.size())));
    for (int l : data.labels)
        put(out, static_cast<std::uint32_t>(l));
    if (!out)
        throw IoError("write failed for " + path);
}

model::Dataset read_binary(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic)
        throw IoError(path + " is not an RKM1 dataset");
    const auto n = get<std::uint32_t>(in, path);
    const auto count = get<std::uint32_t>(in, path);
    model::Dataset data;
    data.points.resize(n, count);
    if (!in.read(reinterpret_cast<char*>(data.points.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(n) * count)))
        throw IoError("truncated dataset file " + path);
    data.labels.resize(count);
    for (auto& l : data.labels) {
        const auto v = get<std::uint32_t>(in, path);
        if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
            throw IoError("label out of range in " + path);
        l = static_cast<int>(v);
    }
    return data;
}

void write_csv(const model::Dataset& data, const std::string& path)
{
    check_shape(data);
    auto out = open_out(path, std::ios::trunc);
    for (Eigen::Index r = 0; r < data.dim(); ++r)
        out << 'x' << r << ',';
    out << "label\n";
    out.precision(17);
    for (Eigen::Index j = 0; j < data.size(); ++j) {
        for (Eigen::Index r = 0; r < data.dim(); ++r)
            out << data.points(r, j) << ',';
        out << data.labels[static_cast<std::size_t>(j)] << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path);
}

model::Dataset read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path + " is empty");
    Eigen::Index n = 0;
    for (char ch : line)
        n += ch == ',';
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        Eigen::Index fields = 0;
        while (std::getline(ss, cell, ',')) {
            // strtod instead of stod: subnormal values must round-trip, not throw.
            const char* begin = cell.c_str();
            char* end = nullptr;
            if (fields < n)
                values.push_back(std::strtod(begin, &end));
            else
                labels.push_back(static_cast<int>(std::strtol(begin, &end, 10)));
            if (cell.empty() || end != begin + cell.size())
                throw IoError(path + ": bad value '" + cell + "' on line " + std::to_string(row));
            ++fields;
        }
        if (fields != n + 1)
            throw IoError(path + ": wrong field count on line " + std::to_string(row));
    }
    model::Dataset data;
    data.points = Eigen::Map<const linalg::Matrix>(values.data(), n, static_cast<Eigen::Index>(labels.size()));
    data.labels = std::move(labels);
    return data;
}

} // namespace rkm::cli
