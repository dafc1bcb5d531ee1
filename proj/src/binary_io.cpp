#include <hierfcst/binary_io.hpp>

#include <hierfcst/error.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hierfcst {
namespace {

constexpr char kMagic[4] = {'H', 'F', 'C', 'B'};

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

void BinaryWriter::raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
}

void BinaryWriter::u8(std::uint8_t v) { raw(&v, sizeof v); }
void BinaryWriter::u32(std::uint32_t v) { raw(&v, sizeof v); }
void BinaryWriter::u64(std::uint64_t v) { raw(&v, sizeof v); }
void BinaryWriter::f64(double v) { raw(&v, sizeof v); }

void BinaryWriter::str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
}

void BinaryWriter::f64s(std::span<const double> v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
}

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

void BinaryWriter::vector(const Eigen::VectorXd& v) {
    f64s(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void BinaryReader::raw(void* p, std::size_t n) {
    if (n > buf_.size() - pos_) {
        throw FormatError("truncated container payload");
    }
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
}

std::uint8_t BinaryReader::u8() {
    std::uint8_t v;
    raw(&v, sizeof v);
    return v;
}

std::uint32_t BinaryReader::u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
}

std::uint64_t BinaryReader::u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
}

double BinaryReader::f64() {
    double v;
    raw(&v, sizeof v);
    return v;
}

std::string BinaryReader::str() {
    const auto n = u64();
    if (n > buf_.size() - pos_) {
        throw FormatError("truncated string");
    }
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
}

std::vector<double> BinaryReader::f64s() {
    const auto n = u64();
    if (n > (buf_.size() - pos_) / sizeof(double)) {
        throw FormatError("truncated array");
    }
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
}

Eigen::MatrixXd BinaryReader::matrix() {
    const auto rows = u64();
    const auto cols = u64();
    if (cols != 0 && rows > (buf_.size() - pos_) / sizeof(double) / cols) {
        throw FormatError("truncated matrix");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    raw(m.data(), rows * cols * sizeof(double));
    return m;
}

Eigen::VectorXd BinaryReader::vector() {
    const auto v = f64s();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_container(const std::filesystem::path& path, ContainerKind kind,
                     const BinaryWriter& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    BinaryWriter header;
    header.u32(kContainerVersion);
    header.u32(static_cast<std::uint32_t>(kind));
    header.u64(payload.bytes().size());
    out.write(kMagic, sizeof kMagic);
    out.write(header.bytes().data(), static_cast<std::streamsize>(header.bytes().size()));
    out.write(payload.bytes().data(), static_cast<std::streamsize>(payload.bytes().size()));
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

namespace {

BinaryReader open_checked(const std::filesystem::path& path, ContainerKind* kind_out) {
    auto bytes = slurp(path);
    if (bytes.size() < 4 + 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError(path.string() + " is not a hierfcst container");
    }
    BinaryReader header(std::vector<char>(bytes.begin() + 4, bytes.begin() + 20));
    const auto version = header.u32();
    if (version != kContainerVersion) {
        throw FormatError(path.string() + ": unsupported container version " +
                          std::to_string(version));
    }
    const auto kind = header.u32();
    const auto size = header.u64();
    if (size != bytes.size() - 20) {
        throw FormatError(path.string() + ": payload size mismatch");
    }
    *kind_out = static_cast<ContainerKind>(kind);
    return BinaryReader(std::vector<char>(bytes.begin() + 20, bytes.end()));
}

} // namespace

BinaryReader read_container(const std::filesystem::path& path, ContainerKind kind) {
    ContainerKind actual{};
    auto reader = open_checked(path, &actual);
    if (actual != kind) {
        throw FormatError(path.string() + ": unexpected container kind " +
                          std::to_string(static_cast<std::uint32_t>(actual)));
    }
    return reader;
}

ContainerKind peek_container_kind(const std::filesystem::path& path) {
    ContainerKind actual{};
    open_checked(path, &actual);
    return actual;
}

} // namespace hierfcst
