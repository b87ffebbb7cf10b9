#include "slic/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slic/manifest.hpp"
#include "slic/metrics.hpp"
#include "slic/rng.hpp"
#include "slic/train/subflows.hpp"

namespace slic {

namespace fs = std::filesystem;

namespace {

uint64_t item_index(int epoch, int64_t pos) {
  return (static_cast<uint64_t>(epoch) << 32) | static_cast<uint64_t>(pos);
}

ModelSpec spec_from(const TrainingConfig& cfg) {
  ModelSpec s;
  s.latent_channels = cfg.latent_channels;
  s.msg_bits = cfg.msg_bits;
  s.preset = cfg.preset;
  return s;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

Trainer::Trainer(const TrainingConfig& cfg)
    : cfg_(cfg),
      codec_(spec_from(cfg)),
      mc_(cfg.latent_channels, cfg.msg_bits),
      pm_(&resolve_perceptual(cfg.perceptual)) {
  cfg_.validate();
  opt_msg_ = std::make_unique<Adam>(mc_.params(), cfg_.lr_message);
  opt_codec_ = std::make_unique<Adam>(codec_.params(), cfg_.lr_codec);
}

Image Trainer::load_item(const std::string& path) {
  auto it = cache_.find(path);
  if (it == cache_.end()) {
    Image im = read_image(path);
    CachedItem ci{im.c, im.h, im.w, image_to_u8(im)};
    it = cache_.emplace(path, std::move(ci)).first;
  }
  const CachedItem& ci = it->second;
  return image_from_u8(ci.px.data(), ci.c, ci.h, ci.w);
}

Image Trainer::crop_for(int epoch, int64_t pos, const std::string& path) {
  Image im = load_item(path);
  auto rng = make_rng(cfg_.seed, rng_stream::kCrops, item_index(epoch, pos));
  return random_crop(im, cfg_.crop, rng);
}

std::vector<uint8_t> Trainer::message_for(int epoch, int64_t pos) {
  auto rng = make_rng(cfg_.seed, rng_stream::kMessages, item_index(epoch, pos));
  return random_bits(rng, cfg_.msg_bits);
}

uint64_t Trainer::noise_seed_for(int epoch, int64_t pos) const {
  return derive_seed(cfg_.seed, rng_stream::kQuantNoise, item_index(epoch, pos));
}

void Trainer::prepare() {
  if (prepared_) return;
  if (cfg_.dataset.empty()) throw std::invalid_argument("trainer: dataset path not set");
  fs::create_directories(cfg_.out_dir);
  ds_ = ingest_dataset(cfg_.dataset, cfg_.val_fraction, cfg_.crop, cfg_.seed);
  model_path_ = cfg_.out_dir + "/model.slcm";

  auto latest = latest_checkpoint(cfg_.out_dir);
  if (latest) {
    if (!resume_)
      throw std::invalid_argument("trainer: " + cfg_.out_dir +
                                  " already contains checkpoints; pass --resume to continue");
    CheckpointMeta meta =
        load_checkpoint(*latest, codec_, mc_, opt_msg_.get(), opt_codec_.get());
    epochs_done_ = meta.epochs_done;
    std::ifstream st(cfg_.out_dir + "/trainer_state.json");
    if (st) {
      nlohmann::json j;
      st >> j;
      best_score_ = j.value("best_score", best_score_);
      best_epoch_ = j.value("best_epoch", best_epoch_);
    }
    std::cerr << "resuming from " << *latest << " (epochs done: " << epochs_done_ << ")\n";
  } else if (!cfg_.init_model.empty()) {
    load_checkpoint(cfg_.init_model, codec_, mc_, nullptr, nullptr);
    std::cerr << "initialized from " << cfg_.init_model << "\n";
  } else {
    codec_.init_params(derive_seed(cfg_.seed, rng_stream::kInit, 1));
    mc_.init_params(derive_seed(cfg_.seed, rng_stream::kInit, 2));
  }

  std::string csv_path = cfg_.out_dir + "/train_log.csv";
  bool fresh = !fs::exists(csv_path) || fs::file_size(csv_path) == 0;
  csv_.open(csv_path, std::ios::app);
  if (!csv_) throw std::runtime_error("trainer: cannot open " + csv_path);
  if (fresh) csv_header();
  prepared_ = true;
}

void Trainer::csv_header() {
  csv_ << "epoch,phase,batch,lp,lm,la,lh,rate_bpp,dist_mse,lc,ber,"
          "psnr_cover,psnr_stego,psnr_stego_recomp,psnr_cover_recomp\n";
  csv_.flush();
}

void Trainer::csv_train_row(int epoch, int phase, int batch, const LossReport& rep, bool full,
                            double ber, double pc, double ps, double ps2) {
  csv_ << epoch << ',' << phase << ',' << batch << ',';
  if (full)
    csv_ << fmt(rep.lp) << ',' << fmt(rep.lm) << ',' << fmt(rep.la) << ',' << fmt(rep.lh);
  else
    csv_ << ",,,";
  csv_ << ',' << fmt(rep.r_bpp) << ',' << fmt(rep.d_mse) << ',' << fmt(rep.lc) << ','
       << fmt(ber) << ',' << fmt(pc) << ',' << fmt(ps) << ',' << fmt(ps2) << ",\n";
  csv_.flush();
}

void Trainer::csv_val_row(const ValStats& vs) {
  csv_ << vs.epoch << ",val,,,,,,,,," << fmt(vs.ber) << ',' << fmt(vs.psnr_cover) << ','
       << fmt(vs.psnr_stego) << ',' << fmt(vs.psnr_stego2) << ',' << fmt(vs.psnr_cover2)
       << "\n";
  csv_.flush();
}

CheckpointMeta Trainer::meta_for(int epochs_done) const {
  CheckpointMeta m;
  m.latent_channels = cfg_.latent_channels;
  m.msg_bits = cfg_.msg_bits;
  m.preset = cfg_.preset;
  m.stage = cfg_.stage;
  m.seed = cfg_.seed;
  m.epochs_done = epochs_done;
  m.has_optimizer = true;
  return m;
}

void Trainer::abort_snapshot(int epoch, int phase, int batch, const LossReport& rep) {
  char name[64];
  std::snprintf(name, sizeof(name), "abort_e%04d.slcm", epoch);
  std::string path = cfg_.out_dir + "/" + name;
  save_checkpoint(path, meta_for(epoch), codec_, mc_, opt_msg_.get(), opt_codec_.get());
  write_checkpoint_sidecar(path, meta_for(epoch), codec_, mc_);
  std::ostringstream msg;
  msg << "non-finite loss at epoch " << epoch << " phase " << phase << " batch " << batch
      << " (lp=" << rep.lp << " lm=" << rep.lm << " la=" << rep.la << " r=" << rep.r_bpp
      << " d=" << rep.d_mse << "); snapshot written to " << path;
  throw std::runtime_error(msg.str());
}

void Trainer::run_phase1(int epoch, const std::vector<size_t>& order, const TrainHooks& hooks) {
  const std::string theta0 = codec_.params().digest_hex();
  const int bs = cfg_.batch;
  const int64_t pixels = static_cast<int64_t>(cfg_.crop) * cfg_.crop;
  const size_t nb = (order.size() + bs - 1) / bs;

  for (size_t b = 0; b < nb; ++b) {
    auto atk_rng = make_rng(cfg_.seed, rng_stream::kAttack, item_index(epoch, b));
    TrainAttack atk = sample_train_attack(atk_rng, cfg_.crop, cfg_.crop);
    mc_.params().zero_grad();

    size_t i0 = b * bs, i1 = std::min(order.size(), i0 + bs);
    double inv = 1.0 / static_cast<double>(i1 - i0);
    LossReport rep;
    double ber = 0, pc = 0, ps = 0, ps2 = 0;
    for (size_t i = i0; i < i1; ++i) {
      Image cover = crop_for(epoch, static_cast<int64_t>(i), ds_.train_files[order[i]]);
      std::vector<uint8_t> msg = message_for(epoch, static_cast<int64_t>(i));
      Tape t;
      FlowOptions opt;
      opt.train_codec = false;
      opt.train_message = true;
      opt.attack = atk;
      opt.noise_seed = noise_seed_for(epoch, static_cast<int64_t>(i));
      SubflowVars sv = forward_subflows(t, codec_, mc_, cover, msg, opt);
      HidingLossVars hv = assemble_hiding_loss(t, sv, *pm_, cfg_);
      t.backward(hv.lh, inv);

      LossReport item;
      item.lp = hv.lp.item();
      item.lm = hv.lm.item();
      item.la = hv.la.item();
      item.lh = hv.lh.item();
      fill_codec_terms(sv, cfg_, pixels, item);
      rep.accumulate(item, inv);
      ber += inv * bit_error_rate(MessageCoder::threshold_logits(sv.m_logits.v()), msg);
      Image chat = Image::from_tensor(TensorData{sv.chat.shape(), sv.chat.v()});
      Image shat = Image::from_tensor(TensorData{sv.shat.shape(), sv.shat.v()});
      Image shat2 = Image::from_tensor(TensorData{sv.shat2.shape(), sv.shat2.v()});
      pc += inv * psnr(cover, chat);
      ps += inv * psnr(chat, shat);
      ps2 += inv * psnr(shat, shat2);
    }
    if (!rep.finite() || !std::isfinite(mc_.params().grad_sq_norm()))
      abort_snapshot(epoch, 1, static_cast<int>(b), rep);
    opt_msg_->step();
    csv_train_row(epoch, 1, static_cast<int>(b), rep, true, ber, pc, ps, ps2);
    if (hooks.on_batch) hooks.on_batch(epoch, 1, static_cast<int>(b), rep);
  }

  if (codec_.params().digest_hex() != theta0)
    throw std::logic_error("freeze contract violated: codec parameters changed in phase 1");
  if (hooks.on_phase_end) hooks.on_phase_end(epoch, 1);
}

void Trainer::run_phase2(int epoch, const std::vector<size_t>& order, const TrainHooks& hooks) {
  const std::string phi0 = mc_.params().digest_hex();
  const int bs = cfg_.batch;
  const int64_t pixels = static_cast<int64_t>(cfg_.crop) * cfg_.crop;
  const size_t nb = (order.size() + bs - 1) / bs;

  for (size_t b = 0; b < nb; ++b) {
    codec_.params().zero_grad();
    size_t i0 = b * bs, i1 = std::min(order.size(), i0 + bs);
    double inv = 1.0 / static_cast<double>(i1 - i0);
    LossReport rep;
    rep.lp = rep.lm = rep.la = rep.lh = std::numeric_limits<double>::quiet_NaN();
    double pc = 0;
    for (size_t i = i0; i < i1; ++i) {
      Image cover = crop_for(epoch, static_cast<int64_t>(i), ds_.train_files[order[i]]);
      std::vector<uint8_t> msg = message_for(epoch, static_cast<int64_t>(i));
      Tape t;
      CodecPhaseVars pv = forward_codec_phase(t, codec_, mc_, cover, msg,
                                              noise_seed_for(epoch, static_cast<int64_t>(i)));
      CodecLossVars lv = assemble_codec_loss(t, pv, cfg_, pixels);
      t.backward(lv.lc, inv);
      rep.r_bpp += inv * lv.r.item();
      rep.d_mse += inv * lv.d.item();
      rep.lc += inv * lv.lc.item();
      Image chat = Image::from_tensor(TensorData{pv.chat.shape(), pv.chat.v()});
      pc += inv * psnr(cover, chat);
    }
    bool ok = std::isfinite(rep.r_bpp) && std::isfinite(rep.d_mse) && std::isfinite(rep.lc) &&
              std::isfinite(codec_.params().grad_sq_norm());
    if (!ok) abort_snapshot(epoch, 2, static_cast<int>(b), rep);
    opt_codec_->step();
    codec_.invalidate_tables();
    csv_train_row(epoch, 2, static_cast<int>(b), rep, false,
                  std::numeric_limits<double>::quiet_NaN(), pc,
                  std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN());
    if (hooks.on_batch) hooks.on_batch(epoch, 2, static_cast<int>(b), rep);
  }

  if (mc_.params().digest_hex() != phi0)
    throw std::logic_error("freeze contract violated: message parameters changed in phase 2");
  if (hooks.on_phase_end) hooks.on_phase_end(epoch, 2);
}

void Trainer::run_pretrain_phase(int epoch, const std::vector<size_t>& order,
                                 const TrainHooks& hooks) {
  const int bs = cfg_.batch;
  const int64_t pixels = static_cast<int64_t>(cfg_.crop) * cfg_.crop;
  const size_t nb = (order.size() + bs - 1) / bs;

  for (size_t b = 0; b < nb; ++b) {
    codec_.params().zero_grad();
    size_t i0 = b * bs, i1 = std::min(order.size(), i0 + bs);
    double inv = 1.0 / static_cast<double>(i1 - i0);
    LossReport rep;
    rep.lp = rep.lm = rep.la = rep.lh = std::numeric_limits<double>::quiet_NaN();
    double pc = 0;
    for (size_t i = i0; i < i1; ++i) {
      Image cover = crop_for(epoch, static_cast<int64_t>(i), ds_.train_files[order[i]]);
      Tape t;
      CoverFlowVars cv = forward_cover_flow(t, codec_, cover,
                                            noise_seed_for(epoch, static_cast<int64_t>(i)), true);
      CodecLossVars lv = assemble_pretrain_loss(t, cv, cfg_, pixels);
      t.backward(lv.lc, inv);
      rep.r_bpp += inv * lv.r.item();
      rep.d_mse += inv * lv.d.item();
      rep.lc += inv * lv.lc.item();
      Image chat = Image::from_tensor(TensorData{cv.chat.shape(), cv.chat.v()});
      pc += inv * psnr(cover, chat);
    }
    bool ok = std::isfinite(rep.r_bpp) && std::isfinite(rep.d_mse) && std::isfinite(rep.lc) &&
              std::isfinite(codec_.params().grad_sq_norm());
    if (!ok) abort_snapshot(epoch, 2, static_cast<int>(b), rep);
    opt_codec_->step();
    codec_.invalidate_tables();
    csv_train_row(epoch, 2, static_cast<int>(b), rep, false,
                  std::numeric_limits<double>::quiet_NaN(), pc,
                  std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN());
    if (hooks.on_batch) hooks.on_batch(epoch, 2, static_cast<int>(b), rep);
  }
  if (hooks.on_phase_end) hooks.on_phase_end(epoch, 2);
}

void Trainer::train_epoch(int epoch, const TrainHooks& hooks) {
  prepare();
  std::vector<size_t> order(ds_.train_files.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto rng = make_rng(cfg_.seed, rng_stream::kShuffle, static_cast<uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);

  if (cfg_.stage == "pretrain") {
    run_pretrain_phase(epoch, order, hooks);
  } else {
    run_phase1(epoch, order, hooks);
    run_phase2(epoch, order, hooks);
  }
}

ValStats Trainer::validate(int epoch) {
  prepare();
  ValStats vs;
  vs.epoch = epoch;
  size_t n = std::min(ds_.val_files.size(), static_cast<size_t>(cfg_.val_max_items));
  if (n == 0) return vs;

  bool stego_path = cfg_.stage != "pretrain";
  double ber = 0, pc = 0, ps = 0, pc2 = 0, ps2 = 0;
  for (size_t i = 0; i < n; ++i) {
    auto rng = make_rng(cfg_.seed, rng_stream::kEval, item_index(epoch, static_cast<int64_t>(i)));
    Image im = load_item(ds_.val_files[i]);
    Image cover = random_crop(im, cfg_.crop, rng);

    TensorData y = codec_.analyze_image(cover);
    TensorData yq{y.shape, Codec::quantize(y.v)};
    Image chat = codec_.decode_latent(yq, cover.h, cover.w);
    TensorData yc2 = codec_.analyze_image(chat);
    TensorData yc2q{yc2.shape, Codec::quantize(yc2.v)};
    Image chat2 = codec_.decode_latent(yc2q, chat.h, chat.w);
    pc += psnr(cover, chat);
    pc2 += psnr(chat, chat2);

    if (stego_path) {
      std::vector<uint8_t> msg = random_bits(rng, cfg_.msg_bits);
      TensorData pert = mc_.perturbation_plain(msg, y.dim(1), y.dim(2));
      TensorData yeq{y.shape, Codec::quantize(y.v + pert.v)};
      Image shat = codec_.decode_latent(yeq, cover.h, cover.w);
      ber += bit_error_rate(mc_.extract_bits(yeq), msg);
      TensorData ys2 = codec_.analyze_image(shat);
      TensorData ys2q{ys2.shape, Codec::quantize(ys2.v)};
      Image shat2 = codec_.decode_latent(ys2q, shat.h, shat.w);
      ps += psnr(cover, shat);
      ps2 += psnr(shat, shat2);
    }
  }
  double inv = 1.0 / static_cast<double>(n);
  vs.psnr_cover = pc * inv;
  vs.psnr_cover2 = pc2 * inv;
  if (stego_path) {
    vs.ber = ber * inv;
    vs.psnr_stego = ps * inv;
    vs.psnr_stego2 = ps2 * inv;
  }
  return vs;
}

void Trainer::save_rolling(int epoch) {
  CheckpointMeta meta = meta_for(epoch + 1);
  std::string digest = codec_.params().digest_hex();
  std::string path = cfg_.out_dir + "/" + checkpoint_name(epoch, digest);
  save_checkpoint(path, meta, codec_, mc_, opt_msg_.get(), opt_codec_.get());
  write_checkpoint_sidecar(path, meta, codec_, mc_);
  prune_checkpoints(cfg_.out_dir, cfg_.keep_last);
}

void Trainer::maybe_update_best(const ValStats& vs) {
  double score;
  if (cfg_.stage == "pretrain")
    score = std::isfinite(vs.psnr_cover) ? -vs.psnr_cover : best_score_;
  else
    score = std::isfinite(vs.ber) ? vs.ber : best_score_;
  if (score >= best_score_) return;
  best_score_ = score;
  best_epoch_ = vs.epoch;
  CheckpointMeta meta = meta_for(vs.epoch + 1);
  std::string path = cfg_.out_dir + "/best.slcm";
  save_checkpoint(path, meta, codec_, mc_, opt_msg_.get(), opt_codec_.get());
  write_checkpoint_sidecar(path, meta, codec_, mc_);
  nlohmann::json j;
  j["best_score"] = best_score_;
  j["best_epoch"] = best_epoch_;
  write_text_atomic(cfg_.out_dir + "/trainer_state.json", j.dump(2) + "\n");
}

void Trainer::export_model() {
  std::string best = cfg_.out_dir + "/best.slcm";
  std::string src = fs::exists(best) ? best : "";
  if (src.empty()) {
    CheckpointMeta meta = meta_for(epochs_done_);
    save_checkpoint(model_path_, meta, codec_, mc_, opt_msg_.get(), opt_codec_.get());
    write_checkpoint_sidecar(model_path_, meta, codec_, mc_);
    return;
  }
  fs::copy_file(best, model_path_, fs::copy_options::overwrite_existing);
  std::error_code ec;
  fs::copy_file(best + ".json", model_path_ + ".json",
                fs::copy_options::overwrite_existing, ec);
}

ValStats Trainer::run(const TrainHooks& hooks) {
  prepare();
  ValStats last;
  for (int epoch = epochs_done_; epoch < cfg_.epochs; ++epoch) {
    train_epoch(epoch, hooks);
    last = validate(epoch);
    csv_val_row(last);
    if (hooks.on_val) hooks.on_val(last);
    epochs_done_ = epoch + 1;
    maybe_update_best(last);
    if ((epoch + 1) % cfg_.checkpoint_every == 0 || epoch + 1 == cfg_.epochs)
      save_rolling(epoch);
    std::cerr << "[" << cfg_.stage << " epoch " << (epoch + 1) << "/" << cfg_.epochs << "]"
              << " val psnr_cover=" << fmt(last.psnr_cover)
              << " psnr_stego=" << fmt(last.psnr_stego) << " ber=" << fmt(last.ber)
              << " stego_recomp=" << fmt(last.psnr_stego2)
              << " cover_recomp=" << fmt(last.psnr_cover2) << "\n";
  }
  export_model();
  return last;
}

}  // namespace slic
