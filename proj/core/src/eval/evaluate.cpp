#include "slic/eval/evaluate.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slic/digest.hpp"
#include "slic/eval/report.hpp"
#include "slic/eval/svg_plot.hpp"
#include "slic/manifest.hpp"
#include "slic/metrics.hpp"
#include "slic/rng.hpp"

namespace slic {

namespace fs = std::filesystem;

Image recompress_once(Codec& codec, const Image& img) {
  TensorData y = codec.analyze_image(img);
  TensorData yq{y.shape, Codec::quantize(y.v)};
  SlicBitstream bs = codec.pack_latent(yq, img.h, img.w, false);
  return codec.decompress(bs);
}

namespace {

struct EmbeddedImage {
  Image cover, chat, shat;
  TensorData y, yq, yeq;
  std::vector<uint8_t> msg;
};

EmbeddedImage embed_for_eval(Codec& codec, MessageCoder& mc, Image cover, uint64_t seed,
                             uint64_t index) {
  EmbeddedImage e;
  e.cover = std::move(cover);
  e.y = codec.analyze_image(e.cover);
  e.yq = TensorData{e.y.shape, Codec::quantize(e.y.v)};
  e.chat = codec.decode_latent(e.yq, e.cover.h, e.cover.w);
  auto rng = make_rng(seed, rng_stream::kEval, index);
  e.msg = random_bits(rng, mc.bits());
  TensorData pert = mc.perturbation_plain(e.msg, e.y.dim(1), e.y.dim(2));
  e.yeq = TensorData{e.y.shape, Codec::quantize(e.y.v + pert.v)};
  e.shat = codec.decode_latent(e.yeq, e.cover.h, e.cover.w);
  return e;
}

double image_ber(Codec& codec, MessageCoder& mc, const Image& img,
                 const std::vector<uint8_t>& msg) {
  TensorData y = codec.analyze_image(img);
  TensorData yq{y.shape, Codec::quantize(y.v)};
  return bit_error_rate(mc.extract_bits(yq), msg);
}

std::string edit_params_string(const EditSpec& e) {
  std::ostringstream os;
  switch (e.kind) {
    case EditKind::kCopy: os << "canvas_scale=" << e.canvas_scale; break;
    case EditKind::kGaussianBlur: os << "sigma=" << e.blur_sigma; break;
    case EditKind::kLighten: os << "factor=" << e.lighten_factor; break;
    case EditKind::kAffine:
      os << "angle=" << e.angle_deg << " translate=" << e.translate_px
         << " scale=" << e.scale;
      break;
    case EditKind::kJpeg: os << "quality=" << e.jpeg_quality; break;
    case EditKind::kCropout: os << "area=" << e.area; break;
    case EditKind::kDropout: os << "prob=" << e.prob; break;
    default: break;
  }
  return os.str();
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

std::vector<MatrixRow> degradation_matrix(Codec& codec, MessageCoder& mc,
                                          const std::vector<std::string>& files,
                                          const std::vector<EditSpec>& edits, uint64_t seed) {
  std::vector<MatrixRow> rows;
  for (size_t ii = 0; ii < files.size(); ++ii) {
    EmbeddedImage e = embed_for_eval(codec, mc, read_image(files[ii]), seed, ii);
    std::string stem = stem_of(files[ii]);

    MatrixRow cover_row;
    cover_row.image = stem;
    cover_row.kind = "cover";
    cover_row.edit = "none";
    cover_row.psnr_quality = psnr(e.cover, e.chat);
    cover_row.psnr_recomp = psnr(e.chat, recompress_once(codec, e.chat));
    rows.push_back(cover_row);

    MatrixRow stego_row;
    stego_row.image = stem;
    stego_row.kind = "stego";
    stego_row.edit = "none";
    stego_row.psnr_quality = psnr(e.cover, e.shat);
    stego_row.ber = image_ber(codec, mc, e.shat, e.msg);
    stego_row.psnr_recomp = psnr(e.shat, recompress_once(codec, e.shat));
    rows.push_back(stego_row);

    for (size_t ei = 0; ei < edits.size(); ++ei) {
      EditSpec spec = edits[ei];
      spec.seed = derive_seed(seed, rng_stream::kEval, (uint64_t{1} << 32) | (ii * 256 + ei));
      Image edited = apply_edit(e.shat, spec, &e.chat);
      MatrixRow row;
      row.image = stem;
      row.kind = "stego";
      row.edit = edit_name(spec);
      row.params = edit_params_string(spec);
      row.ber = image_ber(codec, mc, edited, e.msg);
      row.psnr_recomp = psnr(edited, recompress_once(codec, edited));
      rows.push_back(row);
    }
  }
  return rows;
}

double overhead_percent(Codec& codec, MessageCoder& mc, const std::vector<std::string>& files,
                        uint64_t seed, double* mean_bits_cover, double* mean_bits_stego) {
  double sum_pct = 0, sum_b = 0, sum_be = 0;
  for (size_t ii = 0; ii < files.size(); ++ii) {
    EmbeddedImage e = embed_for_eval(codec, mc, read_image(files[ii]), seed, ii);
    double b = 8.0 * static_cast<double>(
                         codec.pack_latent(e.yq, e.cover.h, e.cover.w, false).payload.size());
    double be = 8.0 * static_cast<double>(
                          codec.pack_latent(e.yeq, e.cover.h, e.cover.w, true).payload.size());
    sum_pct += (be - b) / b * 100.0;
    sum_b += b;
    sum_be += be;
  }
  double n = static_cast<double>(files.size());
  if (mean_bits_cover) *mean_bits_cover = sum_b / n;
  if (mean_bits_stego) *mean_bits_stego = sum_be / n;
  return sum_pct / n;
}

std::vector<double> default_sweep_grid(const std::string& kind) {
  if (kind == "cropout") return {0.0, 0.1, 0.2, 0.3, 0.5};
  if (kind == "dropout") return {0.0, 0.1, 0.3, 0.5, 0.7};
  if (kind == "affine") return {0.0, 0.5, 1.0, 1.5, 2.0};
  if (kind == "jpeg") return {100, 95, 90, 80, 70, 50};
  throw std::invalid_argument("unknown sweep kind: " + kind);
}

std::vector<SweepPoint> robustness_sweep(Codec& codec, MessageCoder& mc,
                                         const std::vector<std::string>& files,
                                         const std::string& kind,
                                         const std::vector<double>& strengths, uint64_t seed) {
  std::vector<EmbeddedImage> embedded;
  embedded.reserve(files.size());
  for (size_t ii = 0; ii < files.size(); ++ii)
    embedded.push_back(embed_for_eval(codec, mc, read_image(files[ii]), seed, ii));

  std::vector<SweepPoint> curve;
  for (size_t si = 0; si < strengths.size(); ++si) {
    double s = strengths[si];
    SweepPoint pt;
    pt.strength = s;
    double ber = 0, pr = 0;
    for (size_t ii = 0; ii < embedded.size(); ++ii) {
      const EmbeddedImage& e = embedded[ii];
      EditSpec spec;
      if (kind == "cropout") {
        spec.kind = EditKind::kCropout;
        spec.area = s;
      } else if (kind == "dropout") {
        spec.kind = EditKind::kDropout;
        spec.prob = s;
      } else if (kind == "affine") {
        spec.kind = s == 0.0 ? EditKind::kIdentity : EditKind::kAffine;
        spec.angle_deg = 5.0 * s;
        spec.translate_px = 5.0 * s;
        spec.scale = 1.0 - 0.05 * s;
      } else if (kind == "jpeg") {
        spec.kind = EditKind::kJpeg;
        spec.jpeg_quality = static_cast<int>(s);
      } else {
        throw std::invalid_argument("unknown sweep kind: " + kind);
      }
      spec.seed = derive_seed(seed, rng_stream::kEval, (uint64_t{2} << 32) | (ii * 256 + si));
      Image attacked = apply_edit(e.shat, spec, &e.chat);
      ber += image_ber(codec, mc, attacked, e.msg);
      pr += psnr(attacked, recompress_once(codec, attacked));
    }
    pt.ber = ber / static_cast<double>(embedded.size());
    pt.psnr_recomp = pr / static_cast<double>(embedded.size());
    curve.push_back(pt);
  }
  return curve;
}

nlohmann::json run_evaluation(Codec& codec, MessageCoder& mc,
                              const std::vector<std::string>& files, const EvalOptions& opt) {
  if (files.empty()) throw std::runtime_error("evaluate: no input images");
  std::vector<EditSpec> edits = opt.edits.empty() ? standard_edits() : opt.edits;
  std::vector<std::string> sweeps =
      opt.sweeps.empty() ? std::vector<std::string>{"cropout", "dropout", "affine", "jpeg"}
                         : opt.sweeps;
  fs::create_directories(opt.out_dir);
  std::string digest = codec.params().digest_hex();
  std::string prefix = opt.out_dir + "/" + digest.substr(0, 12);

  nlohmann::json summary;
  summary["model_digest"] = digest;
  summary["message_digest"] = mc.params().digest_hex();
  summary["dataset_digest"] = opt.dataset_digest;
  summary["seed"] = opt.seed;
  summary["created"] = iso8601_utc_now();
  summary["images"] = files.size();

  if (opt.with_matrix) {
    auto rows = degradation_matrix(codec, mc, files, edits, opt.seed);
    std::vector<std::vector<std::string>> csv;
    for (const auto& r : rows)
      csv.push_back({r.image, r.kind, r.edit, r.params, format_num(r.psnr_quality),
                     format_num(r.ber), format_num(r.psnr_recomp), digest.substr(0, 12),
                     std::to_string(opt.seed)});
    write_csv(prefix + "_matrix.csv",
              {"image", "kind", "edit", "params", "psnr_quality", "ber", "psnr_recomp",
               "model_digest", "seed"},
              csv);

    // aggregate means
    auto mean_of = [&rows](const std::string& kind, const std::string& edit, auto getter) {
      double sum = 0;
      int n = 0;
      for (const auto& r : rows)
        if (r.kind == kind && r.edit == edit && std::isfinite(getter(r))) {
          sum += getter(r);
          ++n;
        }
      return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
    };
    nlohmann::json m;
    m["psnr_cover"] = mean_of("cover", "none", [](const MatrixRow& r) { return r.psnr_quality; });
    m["psnr_cover_recomp"] =
        mean_of("cover", "none", [](const MatrixRow& r) { return r.psnr_recomp; });
    m["psnr_stego"] = mean_of("stego", "none", [](const MatrixRow& r) { return r.psnr_quality; });
    m["psnr_stego_recomp"] =
        mean_of("stego", "none", [](const MatrixRow& r) { return r.psnr_recomp; });
    m["ber"] = mean_of("stego", "none", [](const MatrixRow& r) { return r.ber; });
    nlohmann::json edits_json;
    for (const auto& e : edits) {
      std::string name = edit_name(e);
      nlohmann::json ej;
      ej["ber"] = mean_of("stego", name, [](const MatrixRow& r) { return r.ber; });
      ej["psnr_recomp"] = mean_of("stego", name, [](const MatrixRow& r) { return r.psnr_recomp; });
      edits_json[name] = ej;
    }
    m["edits"] = edits_json;
    summary["matrix"] = m;
  }

  if (opt.with_overhead) {
    double mb = 0, mbe = 0;
    double pct = overhead_percent(codec, mc, files, opt.seed, &mb, &mbe);
    nlohmann::json o;
    o["overhead_percent"] = pct;
    o["mean_bits_cover"] = mb;
    o["mean_bits_stego"] = mbe;
    summary["overhead"] = o;
    write_text_atomic(prefix + "_overhead.json", o.dump(2) + "\n");
  }

  if (opt.with_sweeps) {
    nlohmann::json sj;
    for (const auto& kind : sweeps) {
      auto curve = robustness_sweep(codec, mc, files, kind, default_sweep_grid(kind), opt.seed);
      std::vector<std::vector<std::string>> csv;
      nlohmann::json points = nlohmann::json::array();
      PlotSeries ber_series{"BER", {}, {}}, psnr_series{"PSNR after recompress", {}, {}};
      for (const auto& pt : curve) {
        csv.push_back({format_num(pt.strength), format_num(pt.ber), format_num(pt.psnr_recomp),
                       digest.substr(0, 12), std::to_string(opt.seed)});
        nlohmann::json pj;
        pj["strength"] = pt.strength;
        pj["ber"] = pt.ber;
        pj["psnr_recomp"] = pt.psnr_recomp;
        points.push_back(pj);
        ber_series.x.push_back(pt.strength);
        ber_series.y.push_back(pt.ber);
        psnr_series.x.push_back(pt.strength);
        psnr_series.y.push_back(pt.psnr_recomp);
      }
      write_csv(prefix + "_sweep_" + kind + ".csv",
                {"strength", "ber", "psnr_recomp", "model_digest", "seed"}, csv);
      std::string xlabel = kind == "jpeg" ? "JPEG quality" : kind + " strength";
      write_svg_chart(prefix + "_sweep_" + kind + "_ber.svg", "Robustness: " + kind, xlabel,
                      "BER", {ber_series});
      write_svg_chart(prefix + "_sweep_" + kind + "_psnr.svg",
                      "Recompression after " + kind, xlabel, "PSNR (dB)", {psnr_series});
      sj[kind] = points;
    }
    summary["sweeps"] = sj;
  }

  write_text_atomic(prefix + "_summary.json", summary.dump(2) + "\n");
  return summary;
}

}  // namespace slic
