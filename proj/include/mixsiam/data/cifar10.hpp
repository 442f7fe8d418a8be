#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mixsiam/data/dataset.hpp"

namespace mixsiam::data {

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;  // 3073
inline constexpr std::size_t kCifarClasses = 10;

enum class Split { Train, Test };

struct Cifar10Layout {
    std::vector<std::string> train_files{"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                                         "data_batch_4.bin", "data_batch_5.bin"};
    std::string test_file = "test_batch.bin";
};

// Parses records from one binary batch: a label byte followed by 1024 red,
// 1024 green and 1024 blue bytes, each plane row-major 32×32.
// `first_index` numbers the records' source_index.
std::vector<ImageRecord> parse_cifar10(std::span<const std::uint8_t> bytes, std::size_t first_index = 0);

std::vector<ImageRecord> read_cifar10_file(const std::filesystem::path& path, std::size_t first_index = 0);

Dataset load_cifar10(const std::filesystem::path& dir, Split split, const Cifar10Layout& layout = {});

// Inverse of parse_cifar10: the dataset must be 3×32×32 with labels < 10.
std::vector<std::uint8_t> encode_cifar10(const Dataset& ds);
void write_cifar10(const Dataset& ds, const std::filesystem::path& path);

}  // namespace mixsiam::data
