#include <charconv>
#include <fstream>
#include <sstream>

#include "flowgate/dataset.hpp"
#include "flowgate/error.hpp"
#include "flowgate/hash.hpp"

// Exchange file layout:
//
//   flowgate-dataset 1
//   rows <N>
//   cols <d>
//   class_counts <n0>,<n1>,<n2>,<n3>,<n4>
//   dict <column> <v0>,<v1>,...      (one line per symbolic column)
//   header label,<name0>,...,<name d-1>
//   <class code>,<x0>,...,<x d-1>    (N lines)
//
// Reals use the shortest representation that reads back to the same double.

namespace flowgate {

namespace {

constexpr std::string_view kMagic = "flowgate-dataset 1";

void append_double(std::string& out, double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

template <typename Range>
std::string join(const Range& r)
{
    std::string s;
    bool first = true;
    for (const auto& v : r) {
        if (!first)
            s += ',';
        first = false;
        s += v;
    }
    return s;
}

void check_token(const std::string& v)
{
    if (v.empty() || v.find_first_of(", \t\r\n") != std::string::npos)
        throw DataError("value '" + v + "' cannot be stored in an exchange file");
}

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::string_view next()
    {
        if (pos_ >= text_.size())
            throw DataError("exchange file truncated after line " + std::to_string(line_));
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos)
            end = text_.size();
        auto line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_;
        return line;
    }

    bool done() const noexcept { return pos_ >= text_.size(); }
    std::size_t line() const noexcept { return line_; }

    std::string_view expect(std::string_view key)
    {
        auto line = next();
        if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ')
            throw DataError("exchange line " + std::to_string(line_) + ": expected '" + std::string(key) + "'");
        return line.substr(key.size() + 1);
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw DataError("exchange line " + std::to_string(line_) + ": " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

template <typename T>
T parse_number(std::string_view s, const LineReader& in)
{
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        in.fail("bad number '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string to_exchange_text(const EncodedDataset& ds)
{
    ds.validate();
    std::string out;
    out += kMagic;
    out += "\nrows " + std::to_string(ds.rows());
    out += "\ncols " + std::to_string(ds.cols());
    out += "\nclass_counts ";
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        if (j)
            out += ',';
        out += std::to_string(ds.class_counts[j]);
    }
    for (const auto& d : ds.dictionaries) {
        for (const auto& v : d.values)
            check_token(v);
        out += "\ndict " + std::to_string(d.column) + ' ' + join(d.values);
    }
    std::vector<std::string> names = ds.feature_names;
    if (names.empty())
        for (std::size_t c = 0; c < ds.cols(); ++c)
            names.push_back("f" + std::to_string(c));
    for (const auto& n : names)
        check_token(n);
    out += "\nheader label," + join(names);
    out += '\n';
    for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
        out += std::to_string(code(ds.labels[static_cast<std::size_t>(r)]));
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
            out += ',';
            append_double(out, ds.features(r, c));
        }
        out += '\n';
    }
    return out;
}

EncodedDataset from_exchange_text(std::string_view text)
{
    LineReader in(text);
    if (in.next() != kMagic)
        in.fail("not a flowgate dataset file");
    const auto rows = parse_number<std::size_t>(in.expect("rows"), in);
    const auto cols = parse_number<std::size_t>(in.expect("cols"), in);

    EncodedDataset ds;
    auto counts = split(in.expect("class_counts"), ',');
    if (counts.size() != kNumClasses)
        in.fail("expected 5 class counts");
    for (std::size_t j = 0; j < kNumClasses; ++j)
        ds.class_counts[j] = parse_number<std::size_t>(counts[j], in);

    std::string_view line = in.next();
    while (line.starts_with("dict ")) {
        auto rest = line.substr(5);
        auto space = rest.find(' ');
        if (space == std::string_view::npos)
            in.fail("malformed dict line");
        SymbolDictionary d;
        d.column = parse_number<std::size_t>(rest.substr(0, space), in);
        for (auto v : split(rest.substr(space + 1), ','))
            d.values.emplace_back(v);
        ds.dictionaries.push_back(std::move(d));
        line = in.next();
    }
    if (!line.starts_with("header label,"))
        in.fail("expected header line");
    for (auto n : split(line.substr(13), ','))
        ds.feature_names.emplace_back(n);
    if (ds.feature_names.size() != cols)
        in.fail("header names " + std::to_string(ds.feature_names.size()) + " columns, expected " +
                std::to_string(cols));

    ds.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    ds.labels.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        auto fields = split(in.next(), ',');
        if (fields.size() != cols + 1)
            in.fail("expected " + std::to_string(cols + 1) + " fields, got " + std::to_string(fields.size()));
        ds.labels.push_back(class_from_code(parse_number<std::size_t>(fields[0], in)));
        for (std::size_t c = 0; c < cols; ++c)
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_number<double>(fields[c + 1], in);
    }
    if (!in.done())
        in.fail("trailing content after " + std::to_string(rows) + " rows");
    ds.validate();
    return ds;
}

void save_dataset(const EncodedDataset& ds, const std::filesystem::path& path)
{
    const auto text = to_exchange_text(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
    if (!out)
        throw DataError("write failure on " + path.string());
}

EncodedDataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_exchange_text(buf.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string dataset_hash(const EncodedDataset& ds)
{
    return hex64(fnv1a64(to_exchange_text(ds)));
}

} // namespace flowgate
