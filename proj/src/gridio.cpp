#include "ams/gridio.hpp"

#include "ams/format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace ams {

namespace {

std::string fmt_value(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    return format_double(v);
}

bool all_counts(const std::vector<double>& values) {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return v >= 0.0 && v == std::floor(v); });
}

double parse_double(const std::string& token, std::size_t row) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row + 1) + ": bad value '" + token + "'");
    }
}

Field read_csv(const std::filesystem::path& path, std::optional<Dtype> dtype) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> values;
    std::size_t columns = 0;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t count = 0;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) {
            values.push_back(parse_double(token, rows));
            ++count;
        }
        if (rows == 0) {
            columns = count;
        } else if (count != columns) {
            throw ParseError("row " + std::to_string(rows + 1) + ": expected " +
                             std::to_string(columns) + " columns, got " + std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("empty CSV " + path.string());

    int n = 0;
    int d = 0;
    if (rows == 1) {
        n = static_cast<int>(columns);
        d = 1;
    } else if (rows == columns) {
        n = static_cast<int>(columns);
        d = 2;
    } else {
        throw ShapeError("CSV must be a single row (d=1) or square (d=2); got " +
                         std::to_string(rows) + "x" + std::to_string(columns));
    }
    const Dtype dt = dtype.value_or(all_counts(values) ? Dtype::Counts : Dtype::Reals);
    Field field(std::move(values), n, d, dt);
    field.validate();
    return field;
}

int read_pgm_token(std::istream& in, const std::filesystem::path& path) {
    // skips whitespace and '#' comments per the netpbm grammar
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw ParseError("bad PGM header in " + path.string());
    return value;
}

Field read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char p = 0;
    char kind = 0;
    in.get(p);
    in.get(kind);
    if (p != 'P' || (kind != '2' && kind != '5'))
        throw ParseError("not a P2/P5 PGM file: " + path.string());
    const int width = read_pgm_token(in, path);
    const int height = read_pgm_token(in, path);
    const int maxval = read_pgm_token(in, path);
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw ParseError("bad PGM dimensions in " + path.string());
    if (width != height)
        throw ShapeError("PGM must be square for scanning; got " + std::to_string(width) +
                         "x" + std::to_string(height));

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(width) * height);
    if (kind == '2') {
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(width) * height; ++i)
            values.push_back(read_pgm_token(in, path));
    } else {
        in.get();  // single whitespace after maxval
        const bool wide = maxval > 255;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(width) * height; ++i) {
            unsigned char hi = 0;
            unsigned char lo = 0;
            if (wide) {
                in.read(reinterpret_cast<char*>(&hi), 1);
                in.read(reinterpret_cast<char*>(&lo), 1);
                values.push_back(hi * 256 + lo);
            } else {
                in.read(reinterpret_cast<char*>(&lo), 1);
                values.push_back(lo);
            }
        }
        if (!in) throw ParseError("truncated PGM payload in " + path.string());
    }
    Field field(std::move(values), width, 2, Dtype::Counts);
    field.validate();
    return field;
}

Field read_rawtext(const std::filesystem::path& path, std::optional<Dtype> dtype) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "ams-grid" || version != 1)
        throw ParseError("missing 'ams-grid 1' header in " + path.string());
    int d = 0;
    int n = 0;
    std::string dtype_str;
    std::string token;
    for (int i = 0; i < 3; ++i) {
        if (!(in >> token)) throw ParseError("incomplete grid header in " + path.string());
        if (token.rfind("d=", 0) == 0) d = std::stoi(token.substr(2));
        else if (token.rfind("n=", 0) == 0) n = std::stoi(token.substr(2));
        else if (token.rfind("dtype=", 0) == 0) dtype_str = token.substr(6);
        else throw ParseError("unknown grid header field '" + token + "'");
    }
    if (d < 1 || n < 1) throw ParseError("grid header must declare d >= 1 and n >= 1");
    Dtype dt;
    if (dtype_str == "counts") dt = Dtype::Counts;
    else if (dtype_str == "reals") dt = Dtype::Reals;
    else throw ParseError("grid dtype must be counts or reals");
    if (dtype) dt = *dtype;

    const std::int64_t expect = grid_size(n, d);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(expect));
    double v = 0.0;
    while (in >> v) values.push_back(v);
    if (static_cast<std::int64_t>(values.size()) != expect)
        throw ShapeError("grid payload has " + std::to_string(values.size()) +
                         " values, header declares " + std::to_string(expect));
    Field field(std::move(values), n, d, dt);
    field.validate();
    return field;
}

}  // namespace

GridFormat sniff_format(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".csv") return GridFormat::CSV;
    if (ext == ".pgm") return GridFormat::PGM;
    return GridFormat::RawText;
}

Field read_grid(const std::filesystem::path& path, std::optional<GridFormat> format,
                std::optional<Dtype> dtype) {
    switch (format.value_or(sniff_format(path))) {
        case GridFormat::CSV: return read_csv(path, dtype);
        case GridFormat::PGM: return read_pgm(path);
        case GridFormat::RawText: return read_rawtext(path, dtype);
    }
    throw ConfigError("unknown grid format");
}

void write_grid(const std::filesystem::path& path, const Field& field, GridFormat format) {
    field.validate();
    std::ofstream out(path, format == GridFormat::PGM
                                ? std::ios::binary | std::ios::trunc
                                : std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    switch (format) {
        case GridFormat::CSV: {
            if (field.d > 2) throw ShapeError("CSV output supports d <= 2");
            const std::int64_t cols = field.n;
            const std::int64_t rows = field.d == 1 ? 1 : field.n;
            for (std::int64_t r = 0; r < rows; ++r) {
                for (std::int64_t c = 0; c < cols; ++c) {
                    if (c) out << ",";
                    out << fmt_value(field.data[static_cast<std::size_t>(r * cols + c)]);
                }
                out << "\n";
            }
            break;
        }
        case GridFormat::PGM: {
            if (field.d != 2) throw ShapeError("PGM output requires d = 2");
            if (field.dtype != Dtype::Counts)
                throw ShapeError("PGM output requires a counts field");
            double maxv = 0.0;
            for (double v : field.data) maxv = std::max(maxv, v);
            if (maxv > 65535.0) throw ShapeError("PGM output supports counts <= 65535");
            const int maxval = maxv > 255.0 ? 65535 : 255;
            out << "P5\n" << field.n << " " << field.n << "\n" << maxval << "\n";
            for (double v : field.data) {
                const auto value = static_cast<std::uint16_t>(v);
                if (maxval > 255) {
                    const unsigned char bytes[2] = {static_cast<unsigned char>(value >> 8),
                                                    static_cast<unsigned char>(value & 0xff)};
                    out.write(reinterpret_cast<const char*>(bytes), 2);
                } else {
                    const unsigned char byte = static_cast<unsigned char>(value);
                    out.write(reinterpret_cast<const char*>(&byte), 1);
                }
            }
            break;
        }
        case GridFormat::RawText: {
            out << "ams-grid 1 d=" << field.d << " n=" << field.n
                << " dtype=" << (field.dtype == Dtype::Counts ? "counts" : "reals") << "\n";
            const std::int64_t row = field.n;
            for (std::int64_t i = 0; i < field.size(); ++i) {
                out << fmt_value(field.data[static_cast<std::size_t>(i)]);
                out << ((i + 1) % row == 0 ? "\n" : " ");
            }
            break;
        }
    }
    if (!out) throw IoError("short write on " + path.string());
}

}  // namespace ams
