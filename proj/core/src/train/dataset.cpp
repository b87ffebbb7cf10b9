#include "slic/train/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include "slic/digest.hpp"
#include "slic/rng.hpp"

namespace slic {

namespace fs = std::filesystem;

namespace {

bool has_image_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

Dataset ingest_dataset(const std::string& root, double val_fraction, int min_dim,
                       uint64_t master_seed) {
  if (!fs::is_directory(root))
    throw std::runtime_error("dataset: not a directory: " + root);

  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && has_image_ext(entry.path()))
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  std::vector<std::string> usable;
  usable.reserve(files.size());
  for (const auto& f : files) {
    try {
      Image im = read_image(f);
      if (im.h < min_dim || im.w < min_dim) {
        std::cerr << "warning: skipping " << f << " (" << im.w << "x" << im.h
                  << " smaller than crop " << min_dim << ")\n";
        continue;
      }
      usable.push_back(f);
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping unreadable " << f << ": " << e.what() << "\n";
    }
  }
  if (usable.empty()) throw std::runtime_error("dataset: no usable images under " + root);

  auto rng = make_rng(master_seed, rng_stream::kSplit);
  std::shuffle(usable.begin(), usable.end(), rng);

  size_t n_val = static_cast<size_t>(std::lround(val_fraction * usable.size()));
  if (val_fraction > 0 && n_val == 0) n_val = 1;
  Dataset ds;
  ds.val_files.assign(usable.begin(), usable.begin() + n_val);
  ds.train_files.assign(usable.begin() + n_val, usable.end());
  if (ds.train_files.empty()) throw std::runtime_error("dataset: empty training split");
  return ds;
}

Image random_crop(const Image& im, int crop, std::mt19937_64& rng) {
  if (im.h < crop || im.w < crop)
    throw std::runtime_error("random_crop: image smaller than crop");
  std::uniform_int_distribution<int> dy(0, im.h - crop), dx(0, im.w - crop);
  int y0 = dy(rng), x0 = dx(rng);
  Image out = Image::zeros(im.c, crop, crop);
  for (int c = 0; c < im.c; ++c)
    for (int y = 0; y < crop; ++y)
      for (int x = 0; x < crop; ++x) out.at(c, y, x) = im.at(c, y0 + y, x0 + x);
  return out;
}

std::string dataset_digest(const Dataset& ds) {
  std::vector<std::string> all;
  all.reserve(ds.train_files.size() + ds.val_files.size());
  for (const auto& f : ds.train_files) all.push_back("t:" + f);
  for (const auto& f : ds.val_files) all.push_back("v:" + f);
  std::sort(all.begin(), all.end());
  Sha256 h;
  for (const auto& s : all) h.update(s.data(), s.size() + 1);
  return hex_encode(h.finish().data(), 32);
}

}  // namespace slic
