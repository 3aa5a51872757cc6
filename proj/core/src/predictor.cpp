#include "gotedit/predictor.hpp"

#include <cmath>
#include <string>

#include "gotedit/error.hpp"

namespace gotedit {
namespace {

double channel_frequency(int i, int n) {
  return 1.0 / std::pow(10000.0, static_cast<double>(2 * (i / 2)) / std::max(n, 1));
}

double sinusoid(int i, double pos, double freq) { return i % 2 == 0 ? std::sin(pos * freq) : std::cos(pos * freq); }

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  Eigen::VectorXd e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

void check_attention(const AttentionParams& p, int C, const char* what) {
  for (const auto* m : {&p.Wq, &p.Wk, &p.Wv, &p.Wo}) {
    if (m->rows() != C || m->cols() != C) {
      throw ValidationError(std::string(what) + " attention maps must be " + std::to_string(C) + "x" + std::to_string(C));
    }
  }
}

void save_attention(const AttentionParams& p, const std::filesystem::path& dir, const std::string& prefix) {
  tensor_write(matrix_to_tensor(p.Wq), dir / (prefix + "_wq.gted"));
  tensor_write(matrix_to_tensor(p.Wk), dir / (prefix + "_wk.gted"));
  tensor_write(matrix_to_tensor(p.Wv), dir / (prefix + "_wv.gted"));
  tensor_write(matrix_to_tensor(p.Wo), dir / (prefix + "_wo.gted"));
}

AttentionParams load_attention(const std::filesystem::path& dir, const std::string& prefix) {
  return AttentionParams{tensor_to_matrix(tensor_read(dir / (prefix + "_wq.gted"))),
                         tensor_to_matrix(tensor_read(dir / (prefix + "_wk.gted"))),
                         tensor_to_matrix(tensor_read(dir / (prefix + "_wv.gted"))),
                         tensor_to_matrix(tensor_read(dir / (prefix + "_wo.gted")))};
}

}  // namespace

LabelMap make_label_map(const BoxLTRB& box, int height, int width, double sigma) {
  if (height < 1 || width < 1) throw ValidationError("label map extents must be positive");
  if (!(sigma > 0.0)) throw ValidationError("label sigma must be positive");
  const double r0 = box.center_y();
  const double c0 = box.center_x();
  if (!(r0 >= 0.0 && r0 < height && c0 >= 0.0 && c0 < width)) {
    throw ValidationError("label centre lies outside the grid");
  }
  LabelMap out;
  out.L.resize(height * width);
  out.height = height;
  out.width = width;
  out.peak_row = r0;
  out.peak_col = c0;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int h = 0; h < height; ++h)
    for (int w = 0; w < width; ++w) {
      const double d2 = (h - r0) * (h - r0) + (w - c0) * (w - c0);
      out.L[h * width + w] = std::exp(-d2 * inv);
    }
  return out;
}

double default_label_sigma(const BoxLTRB& box) { return 0.25 * std::min(box.width(), box.height()); }

FeatureMap encode_reference(const FeatureMap& F, const LabelMap& L, const Eigen::VectorXd& e_fg) {
  if (L.height != F.height() || L.width != F.width()) throw ValidationError("encode_reference: label grid mismatch");
  if (e_fg.size() != F.channels()) throw ValidationError("encode_reference: embedding length mismatch");
  Eigen::MatrixXd values = F.values() + e_fg * L.L.transpose();
  return FeatureMap(F.kind(), F.height(), F.width(), std::move(values));
}

AttentionParams AttentionParams::seeded(int C, Rng& rng) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(C));
  AttentionParams p;
  p.Wq = gaussian_matrix(C, C, sd, rng);
  p.Wk = gaussian_matrix(C, C, sd, rng);
  p.Wv = gaussian_matrix(C, C, sd, rng);
  p.Wo = gaussian_matrix(C, C, sd, rng);
  return p;
}

AttentionParams AttentionParams::zeros(int C) {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(C, C);
  return AttentionParams{z, z, z, z};
}

PredictorParams PredictorParams::seeded(int C, std::uint64_t seed, bool shared_trunk) {
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(C));
  PredictorParams p;
  p.encoder = AttentionParams::seeded(C, rng);
  p.decoder = AttentionParams::seeded(C, rng);
  p.head_sem = HeadParams{gaussian_matrix(C, C, sd, rng), gaussian_vector(C, sd, rng)};
  p.head_geo = HeadParams{gaussian_matrix(C, C, sd, rng), gaussian_vector(C, sd, rng)};
  p.shared_trunk = shared_trunk;
  if (shared_trunk) {
    p.encoder_geo = p.encoder;
    p.decoder_geo = p.decoder;
  } else {
    p.encoder_geo = AttentionParams::seeded(C, rng);
    p.decoder_geo = AttentionParams::seeded(C, rng);
  }
  return p;
}

PredictorParams PredictorParams::load(const std::filesystem::path& dir) {
  PredictorParams p;
  p.encoder = load_attention(dir, "enc");
  p.decoder = load_attention(dir, "dec");
  p.head_sem = HeadParams{tensor_to_matrix(tensor_read(dir / "head_sem_w.gted")),
                          tensor_to_vector(tensor_read(dir / "head_sem_b.gted"))};
  p.head_geo = HeadParams{tensor_to_matrix(tensor_read(dir / "head_geo_w.gted")),
                          tensor_to_vector(tensor_read(dir / "head_geo_b.gted"))};
  p.shared_trunk = !std::filesystem::exists(dir / "geo_enc_wq.gted");
  if (p.shared_trunk) {
    p.encoder_geo = p.encoder;
    p.decoder_geo = p.decoder;
  } else {
    p.encoder_geo = load_attention(dir, "geo_enc");
    p.decoder_geo = load_attention(dir, "geo_dec");
  }
  if (std::filesystem::exists(dir / "pe_scale.gted")) {
    p.pe_scale = tensor_to_vector(tensor_read(dir / "pe_scale.gted"))[0];
  }
  const int C = p.channels();
  check_attention(p.encoder, C, "encoder");
  check_attention(p.decoder, C, "decoder");
  check_attention(p.encoder_geo, C, "geometry encoder");
  check_attention(p.decoder_geo, C, "geometry decoder");
  if (p.head_sem.b.size() != C || p.head_geo.W.rows() != C || p.head_geo.W.cols() != C || p.head_geo.b.size() != C) {
    throw ValidationError("predictor head shapes are inconsistent");
  }
  return p;
}

void PredictorParams::save(const std::filesystem::path& dir) const {
  save_attention(encoder, dir, "enc");
  save_attention(decoder, dir, "dec");
  if (!shared_trunk) {
    save_attention(encoder_geo, dir, "geo_enc");
    save_attention(decoder_geo, dir, "geo_dec");
  }
  tensor_write(matrix_to_tensor(head_sem.W), dir / "head_sem_w.gted");
  tensor_write(vector_to_tensor(head_sem.b), dir / "head_sem_b.gted");
  tensor_write(matrix_to_tensor(head_geo.W), dir / "head_geo_w.gted");
  tensor_write(vector_to_tensor(head_geo.b), dir / "head_geo_b.gted");
  tensor_write(vector_to_tensor(Eigen::VectorXd::Constant(1, pe_scale)), dir / "pe_scale.gted");
}

Eigen::MatrixXd positional_encoding(int C, int height, int width) {
  Eigen::MatrixXd pe(C, height * width);
  const int half = C / 2;
  for (int c = 0; c < C; ++c) {
    const bool rows = c < half;
    const int i = rows ? c : c - half;
    const double f = channel_frequency(i, rows ? half : C - half);
    for (int h = 0; h < height; ++h)
      for (int w = 0; w < width; ++w) pe(c, h * width + w) = sinusoid(i, rows ? h : w, f);
  }
  return pe;
}

Eigen::VectorXd frame_offset(int C, int slot) {
  Eigen::VectorXd off(C);
  for (int c = 0; c < C; ++c) off[c] = sinusoid(c, slot + 1.0, channel_frequency(c, C));
  return off;
}

Eigen::MatrixXd self_attention(const Eigen::MatrixXd& X, const AttentionParams& p) {
  // A zero output map makes the block an exact identity.
  if (p.Wo.isZero(0.0)) return X;
  const double scale = 1.0 / std::sqrt(static_cast<double>(X.rows()));
  const Eigen::MatrixXd Q = p.Wq * X;
  const Eigen::MatrixXd K = p.Wk * X;
  const Eigen::MatrixXd V = p.Wv * X;
  // S(j, i) = k_j . q_i, so column i holds the logits of query i.
  Eigen::MatrixXd S = (K.transpose() * Q) * scale;
  for (Eigen::Index i = 0; i < S.cols(); ++i) {
    auto col = S.col(i);
    col = (col.array() - col.maxCoeff()).exp();
    col /= col.sum();
  }
  return X + p.Wo * (V * S);
}

Eigen::VectorXd query_attention(const Eigen::VectorXd& e, const Eigen::MatrixXd& X, const AttentionParams& p) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(X.rows()));
  const Eigen::VectorXd q = p.Wq * e;
  const Eigen::VectorXd logits = (p.Wk * X).transpose() * q * scale;
  const Eigen::VectorXd a = softmax(logits);
  return e + p.Wo * ((p.Wv * X) * a);
}

Eigen::MatrixXd build_tokens(const std::vector<FeatureMap>& refs, const FeatureMap& cur, double pe_scale) {
  const int C = cur.channels();
  const int N = cur.cells();
  const Eigen::MatrixXd pe = positional_encoding(C, cur.height(), cur.width());
  Eigen::MatrixXd tokens(C, N * static_cast<Eigen::Index>(refs.size() + 1));
  auto place = [&](const FeatureMap& f, int slot) {
    auto block = tokens.middleCols(static_cast<Eigen::Index>(slot) * N, N);
    block = f.values() + pe_scale * pe;
    block.colwise() += pe_scale * frame_offset(C, slot);
  };
  for (std::size_t k = 0; k < refs.size(); ++k) place(refs[k], static_cast<int>(k));
  place(cur, static_cast<int>(refs.size()));
  return tokens;
}

WeightVector predict_weights(const std::vector<FeatureMap>& refs, const FeatureMap& cur, const Eigen::VectorXd& e_fg,
                             const PredictorParams& params, Head head) {
  if (refs.empty()) throw ValidationError("predict_weights: at least one reference map is required");
  const int C = cur.channels();
  for (const auto& r : refs) {
    if (!r.same_shape(cur)) throw ValidationError("predict_weights: reference and current maps differ in shape");
  }
  if (e_fg.size() != C || params.channels() != C) {
    throw ValidationError("predict_weights: embedding or parameters do not match C = " + std::to_string(C));
  }
  const Eigen::MatrixXd tokens = build_tokens(refs, cur, params.pe_scale);
  const Eigen::MatrixXd encoded = self_attention(tokens, params.encoder_for(head));
  const Eigen::VectorXd u = query_attention(e_fg, encoded, params.decoder_for(head));
  const HeadParams& h = params.head(head);
  return WeightVector{h.W * u + h.b, head == Head::semantic ? WeightRole::semantic : WeightRole::perturbation};
}

}  // namespace gotedit
