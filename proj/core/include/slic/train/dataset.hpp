#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "slic/image.hpp"

namespace slic {

// Deterministic train/val file split over an image directory tree.
struct Dataset {
  std::vector<std::string> train_files;
  std::vector<std::string> val_files;
};

// Recursively lists decodable images under root (png/jpg/jpeg), drops files
// that fail to decode or are smaller than min_dim (warning to stderr), then
// shuffles with the split seed and carves off val_fraction for validation.
// An empty result is fatal.
Dataset ingest_dataset(const std::string& root, double val_fraction, int min_dim,
                       uint64_t master_seed);

// Random crop with the top-left corner drawn uniformly inside the bounds.
Image random_crop(const Image& im, int crop, std::mt19937_64& rng);

// SHA-256 over the sorted relative file list (cheap provenance for logs).
std::string dataset_digest(const Dataset& ds);

}  // namespace slic
