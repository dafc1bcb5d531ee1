#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst {

//! Payload kinds stored in the versioned binary container.
enum class ContainerKind : std::uint32_t {
    tensor = 1,
    supervised = 2,
    model = 3,
    selector = 4,
};

inline constexpr std::uint32_t kContainerVersion = 1;

//! Appends little-endian primitives to an in-memory buffer.
class BinaryWriter {
public:
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void str(const std::string& s);
    void f64s(std::span<const double> v);
    void matrix(const Eigen::MatrixXd& m);
    void vector(const Eigen::VectorXd& v);

    const std::vector<char>& bytes() const { return buf_; }

private:
    void raw(const void* p, std::size_t n);
    std::vector<char> buf_;
};

//! Bounds-checked reader over a buffer. Throws FormatError on truncation.
class BinaryReader {
public:
    explicit BinaryReader(std::vector<char> buf) : buf_(std::move(buf)) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::string str();
    std::vector<double> f64s();
    Eigen::MatrixXd matrix();
    Eigen::VectorXd vector();

    bool done() const { return pos_ == buf_.size(); }

private:
    void raw(void* p, std::size_t n);
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

//! Writes header (magic, version, kind) followed by the payload.
void write_container(const std::filesystem::path& path, ContainerKind kind,
                     const BinaryWriter& payload);

//! Reads a container, checking magic, version and kind.
BinaryReader read_container(const std::filesystem::path& path, ContainerKind kind);

//! Returns the kind stored in a container without consuming the payload.
ContainerKind peek_container_kind(const std::filesystem::path& path);

} // namespace hierfcst
