#pragma once

#include <nlohmann/json_fwd.hpp>

#include <limits>
#include <string>
#include <vector>

#include "slic/attacks.hpp"
#include "slic/codec.hpp"
#include "slic/message.hpp"
#include "slic/perceptual.hpp"

namespace slic {

// Second-compression primitive: full bitstream round trip with rounded
// quantization (the inference path).
Image recompress_once(Codec& codec, const Image& img);

// One degradation-matrix cell. Conventions: psnr_quality compares the
// unedited reconstruction against the original cover (blank for edited
// rows); psnr_recomp always compares the re-compressed image against the
// exact image that was re-compressed (the edited input for edited rows);
// BER extracts from the decoded image domain (analyze → quantize → h_d).
struct MatrixRow {
  std::string image;
  std::string kind;    // "cover" | "stego"
  std::string edit;    // "none" or an edit name
  std::string params;  // printable edit parameters
  double psnr_quality = std::numeric_limits<double>::quiet_NaN();
  double ber = std::numeric_limits<double>::quiet_NaN();
  double psnr_recomp = std::numeric_limits<double>::quiet_NaN();
};

std::vector<MatrixRow> degradation_matrix(Codec& codec, MessageCoder& mc,
                                          const std::vector<std::string>& files,
                                          const std::vector<EditSpec>& edits, uint64_t seed);

// Mean payload growth of the watermarked bitstream, percent. Optionally
// reports the mean payload sizes (bits) of both streams.
double overhead_percent(Codec& codec, MessageCoder& mc, const std::vector<std::string>& files,
                        uint64_t seed, double* mean_bits_cover = nullptr,
                        double* mean_bits_stego = nullptr);

struct SweepPoint {
  double strength;
  double ber;
  double psnr_recomp;
};

// kind: cropout | dropout | affine | jpeg. Strength semantics: replaced area
// fraction, replacement probability, multiplier on the standard affine edit
// (0 = identity), JPEG quality.
std::vector<SweepPoint> robustness_sweep(Codec& codec, MessageCoder& mc,
                                         const std::vector<std::string>& files,
                                         const std::string& kind,
                                         const std::vector<double>& strengths, uint64_t seed);
std::vector<double> default_sweep_grid(const std::string& kind);

struct EvalOptions {
  std::vector<EditSpec> edits;     // empty -> standard_edits()
  std::vector<std::string> sweeps; // empty -> {cropout, dropout, affine, jpeg}
  uint64_t seed = 1;
  std::string out_dir;
  std::string dataset_digest;      // provenance only
  bool with_matrix = true;
  bool with_overhead = true;
  bool with_sweeps = true;
};

// Runs the requested suites over the file list and writes
// <digest12>_matrix.csv, _overhead.json, _sweep_<kind>.{csv,svg}, and
// _summary.json into out_dir. Returns the summary.
nlohmann::json run_evaluation(Codec& codec, MessageCoder& mc,
                              const std::vector<std::string>& files, const EvalOptions& opt);

}  // namespace slic
