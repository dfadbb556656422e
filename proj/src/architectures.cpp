#include "molab/architectures.hpp"

#include <cmath>
#include <cstdlib>

#include "molab/core/checkpoint.hpp"
#include "molab/seeds.hpp"

namespace molab {

std::string_view to_string(ArchitectureKind kind) {
  switch (kind) {
    case ArchitectureKind::DeepONet: return "DeepONet";
    case ArchitectureKind::DeepONetC: return "DeepONet-C";
    case ArchitectureKind::MIONet: return "MIONet";
    case ArchitectureKind::MONet: return "MONet";
    case ArchitectureKind::MNO: return "MNO";
  }
  return "?";
}

int ArchitectureSpec::trunk_outputs() const {
  if (kind == ArchitectureKind::MNO && per_p_trunks) return param_net_count.value_or(1) * branch_count;
  return trunk_count;
}

int ArchitectureSpec::branch_outputs() const {
  switch (kind) {
    case ArchitectureKind::MONet: return trunk_count * branch_count;
    case ArchitectureKind::MNO: return param_net_count.value_or(1) * branch_count;
    default: return trunk_count;
  }
}

int ArchitectureSpec::param_outputs() const {
  switch (kind) {
    case ArchitectureKind::MIONet: return trunk_count;
    case ArchitectureKind::MONet: return trunk_count * branch_count;
    case ArchitectureKind::MNO: return param_net_count.value_or(1);
    default: return 0;
  }
}

int ArchitectureSpec::branch_input_dim() const {
  return kind == ArchitectureKind::DeepONetC ? alpha_dim + u_sensors : u_sensors;
}

void ArchitectureSpec::validate() const {
  if (trunk_count < 1 || branch_count < 1) throw DomainError("subnetwork counts must be >= 1");
  if (u_sensors < 1) throw DomainError("u sensor count must be >= 1");
  if (alpha_dim < 0) throw DomainError("alpha dimension must be >= 0");
  const bool needs_p = kind == ArchitectureKind::MONet || kind == ArchitectureKind::MNO;
  if (needs_p != param_net_count.has_value())
    throw DomainError("parameter-net count P must be present exactly for MONet and MNO");
  if (param_net_count && *param_net_count < 1) throw DomainError("P must be >= 1");
  if ((kind == ArchitectureKind::DeepONet || kind == ArchitectureKind::DeepONetC ||
       kind == ArchitectureKind::MIONet) && branch_count != trunk_count)
    throw DimensionError(std::string(to_string(kind)) + " needs equal branch and trunk output counts");
  if (kind == ArchitectureKind::MNO && trunk_count != branch_count)
    throw DimensionError("MNO trunk count must equal H");
  if (per_p_trunks && kind != ArchitectureKind::MNO) throw DomainError("per-p trunks only exist for MNO");
  if (has_param_net() && alpha_dim < 1) throw DimensionError("parameter network needs alpha_dim >= 1");
  for (const SubnetShape& s : {trunk, branch, param})
    if (s.depth < 1 || s.width < 1) throw DomainError("subnetwork depth and width must be >= 1");
}

namespace {

MlpParameters<double> init_subnet(int input_dim, int output_dim, SubnetShape shape, std::uint64_t seed) {
  NetworkClassSpec cls;
  cls.input_dim = input_dim;
  cls.output_dim = output_dim;
  cls.depth = shape.depth;
  cls.width = shape.width;
  std::vector<int> hidden(static_cast<std::size_t>(shape.depth - 1), shape.width);
  return init_network<double>(cls, std::span<const int>(hidden), seed);
}

void check_net(const MlpParameters<double>& net, int in, int out, const char* role) {
  if (net.layers.empty() || net.input_dim() != in || net.output_dim() != out)
    throw DimensionError(std::string(role) + " network has shape " + std::to_string(net.input_dim()) + "->" +
                         std::to_string(net.output_dim()) + ", expected " + std::to_string(in) + "->" +
                         std::to_string(out));
}

// Combination heads: branch/param bank outputs -> trunk coefficients, and the
// transpose of their Jacobian.
MatrixXd head_coefficients(const ArchitectureSpec& s, const MatrixXd& b, const MatrixXd& l) {
  const Eigen::Index batch = b.cols();
  switch (s.kind) {
    case ArchitectureKind::DeepONet:
    case ArchitectureKind::DeepONetC: return b;
    case ArchitectureKind::MIONet: return b.cwiseProduct(l);
    case ArchitectureKind::MONet: {
      const int n = s.trunk_count, m = s.branch_count;
      const MatrixXd prod = b.cwiseProduct(l);
      MatrixXd c(n, batch);
      for (int k = 0; k < n; ++k) c.row(k) = prod.middleRows(k * m, m).colwise().sum();
      return c;
    }
    case ArchitectureKind::MNO: {
      const int p_count = *s.param_net_count, h = s.branch_count;
      if (s.per_p_trunks) {
        MatrixXd c(p_count * h, batch);
        for (int p = 0; p < p_count; ++p)
          c.middleRows(p * h, h) = b.middleRows(p * h, h).array().rowwise() * l.row(p).array();
        return c;
      }
      MatrixXd c = MatrixXd::Zero(h, batch);
      for (int p = 0; p < p_count; ++p)
        c.array() += b.middleRows(p * h, h).array().rowwise() * l.row(p).array();
      return c;
    }
  }
  throw DomainError("unknown architecture");
}

void head_backward(const ArchitectureSpec& s, const MatrixXd& b, const MatrixXd& l, const MatrixXd& dc,
                   MatrixXd& db, MatrixXd& dl) {
  const Eigen::Index batch = b.cols();
  switch (s.kind) {
    case ArchitectureKind::DeepONet:
    case ArchitectureKind::DeepONetC: db = dc; return;
    case ArchitectureKind::MIONet:
      db = dc.cwiseProduct(l);
      dl = dc.cwiseProduct(b);
      return;
    case ArchitectureKind::MONet: {
      const int n = s.trunk_count, m = s.branch_count;
      db.resize(b.rows(), batch);
      dl.resize(l.rows(), batch);
      for (int k = 0; k < n; ++k) {
        db.middleRows(k * m, m) = l.middleRows(k * m, m).array().rowwise() * dc.row(k).array();
        dl.middleRows(k * m, m) = b.middleRows(k * m, m).array().rowwise() * dc.row(k).array();
      }
      return;
    }
    case ArchitectureKind::MNO: {
      const int p_count = *s.param_net_count, h = s.branch_count;
      db.resize(b.rows(), batch);
      dl.resize(p_count, batch);
      for (int p = 0; p < p_count; ++p) {
        const auto dc_block = s.per_p_trunks ? dc.middleRows(p * h, h) : dc.middleRows(0, h);
        db.middleRows(p * h, h) = dc_block.array().rowwise() * l.row(p).array();
        dl.row(p) = b.middleRows(p * h, h).cwiseProduct(dc_block).colwise().sum();
      }
      return;
    }
  }
}

MatrixXd branch_input(const ModelState& m, const OperatorBatch& batch) {
  if (m.spec.kind != ArchitectureKind::DeepONetC) return batch.u;
  MatrixXd in(batch.alpha.rows() + batch.u.rows(), batch.size());
  in << batch.alpha, batch.u;
  return in;
}

void check_batch(const ModelState& m, const OperatorBatch& batch) {
  check_model(m);
  const auto& s = m.spec;
  if (batch.x.rows() != 2) throw DimensionError("query points must be (t, x) pairs");
  if (batch.u.rows() != s.u_sensors)
    throw DimensionError("u has " + std::to_string(batch.u.rows()) + " sensors, model expects " +
                         std::to_string(s.u_sensors));
  if (batch.u.cols() != batch.size()) throw DimensionError("u batch size mismatch");
  if (s.kind != ArchitectureKind::DeepONet) {
    if (batch.alpha.rows() != s.alpha_dim)
      throw DimensionError("alpha has length " + std::to_string(batch.alpha.rows()) + ", model expects " +
                           std::to_string(s.alpha_dim));
    if (batch.alpha.cols() != batch.size()) throw DimensionError("alpha batch size mismatch");
  }
}

struct BankOutputs {
  MatrixXd b, l;
  ForwardTrace<double> b_trace, l_trace;
};

BankOutputs run_banks(const ModelState& m, const OperatorBatch& batch, bool traced) {
  BankOutputs o;
  o.b = forward_batch(m.branch, branch_input(m, batch), traced ? &o.b_trace : nullptr);
  if (m.param) o.l = forward_batch(*m.param, batch.alpha, traced ? &o.l_trace : nullptr);
  return o;
}

OperatorBatch single(const VectorXd& alpha, const VectorXd& u, const VectorXd& x) {
  return OperatorBatch{MatrixXd(alpha), MatrixXd(u), MatrixXd(x)};
}

void require_kind(const ModelState& m, ArchitectureKind k) {
  if (m.spec.kind != k)
    throw DomainError("model is " + std::string(to_string(m.spec.kind)) + ", expected " +
                      std::string(to_string(k)));
}

}  // namespace

ModelGradients ModelGradients::zeros_like(const ModelState& m) {
  ModelGradients g;
  g.trunk = GradientSet<double>::zeros_like(m.trunk);
  g.branch = GradientSet<double>::zeros_like(m.branch);
  if (m.param) g.param = GradientSet<double>::zeros_like(*m.param);
  return g;
}

ModelGradients& ModelGradients::operator+=(const ModelGradients& o) {
  trunk += o.trunk;
  branch += o.branch;
  if (param.has_value() != o.param.has_value()) throw DimensionError("gradient sets differ in parameter net");
  if (param) *param += *o.param;
  return *this;
}

ModelState init_model(const ArchitectureSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelState m;
  m.spec = spec;
  m.trunk = init_subnet(2, spec.trunk_outputs(), spec.trunk, derive_seed(seed, {1}));
  m.branch = init_subnet(spec.branch_input_dim(), spec.branch_outputs(), spec.branch, derive_seed(seed, {2}));
  if (spec.has_param_net())
    m.param = init_subnet(spec.param_input_dim(), spec.param_outputs(), spec.param, derive_seed(seed, {3}));
  return m;
}

void check_model(const ModelState& m) {
  m.spec.validate();
  check_net(m.trunk, 2, m.spec.trunk_outputs(), "trunk");
  check_net(m.branch, m.spec.branch_input_dim(), m.spec.branch_outputs(), "branch");
  if (m.spec.has_param_net() != m.param.has_value())
    throw DimensionError("parameter network presence does not match architecture");
  if (m.param) check_net(*m.param, m.spec.param_input_dim(), m.spec.param_outputs(), "parameter");
}

VectorXd predict_batch(const ModelState& model, const OperatorBatch& batch) {
  check_batch(model, batch);
  const MatrixXd t = forward_batch(model.trunk, batch.x);
  const BankOutputs banks = run_banks(model, batch, false);
  const MatrixXd c = head_coefficients(model.spec, banks.b, banks.l);
  return c.cwiseProduct(t).colwise().sum().transpose();
}

BatchBackward backward_batch(const ModelState& model, const OperatorBatch& batch, const VectorXd& upstream) {
  check_batch(model, batch);
  if (upstream.size() != batch.size()) throw DimensionError("upstream length must equal batch size");
  ForwardTrace<double> t_trace;
  const MatrixXd t = forward_batch(model.trunk, batch.x, &t_trace);
  const BankOutputs banks = run_banks(model, batch, true);
  const MatrixXd c = head_coefficients(model.spec, banks.b, banks.l);

  BatchBackward out;
  out.predictions = c.cwiseProduct(t).colwise().sum().transpose();
  const auto g = upstream.transpose().array();
  const MatrixXd dt = c.array().rowwise() * g;
  const MatrixXd dc = t.array().rowwise() * g;
  MatrixXd db, dl;
  head_backward(model.spec, banks.b, banks.l, dc, db, dl);

  out.grads.trunk = backward_batch(model.trunk, t_trace, dt).grads;
  out.grads.branch = backward_batch(model.branch, banks.b_trace, db).grads;
  if (model.param) out.grads.param = backward_batch(*model.param, banks.l_trace, dl).grads;
  return out;
}

ModelGradients architecture_backward(const ModelState& model, const VectorXd& alpha, const VectorXd& u,
                                     const VectorXd& x, double upstream) {
  VectorXd up(1);
  up(0) = upstream;
  return backward_batch(model, single(alpha, u, x), up).grads;
}

double evaluate_point(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x) {
  return predict_batch(model, single(alpha, u, x))(0);
}

double deeponet_eval(const ModelState& model, const VectorXd& u, const VectorXd& x) {
  require_kind(model, ArchitectureKind::DeepONet);
  return evaluate_point(model, VectorXd(0), u, x);
}

double deeponet_concat_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x) {
  require_kind(model, ArchitectureKind::DeepONetC);
  return evaluate_point(model, alpha, u, x);
}

double mionet_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x) {
  require_kind(model, ArchitectureKind::MIONet);
  return evaluate_point(model, alpha, u, x);
}

double monet_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x) {
  require_kind(model, ArchitectureKind::MONet);
  return evaluate_point(model, alpha, u, x);
}

double mno_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x) {
  require_kind(model, ArchitectureKind::MNO);
  return evaluate_point(model, alpha, u, x);
}

MatrixXd trunk_features(const ModelState& model, const MatrixXd& points) {
  if (points.rows() != 2) throw DimensionError("query points must be (t, x) pairs");
  return forward_batch(model.trunk, points);
}

VectorXd trunk_coefficients(const ModelState& model, const VectorXd& alpha, const VectorXd& u) {
  OperatorBatch batch{MatrixXd(alpha), MatrixXd(u), MatrixXd::Zero(2, 1)};
  check_batch(model, batch);
  const BankOutputs banks = run_banks(model, batch, false);
  return head_coefficients(model.spec, banks.b, banks.l).col(0);
}

VectorXd predict_with_features(const ModelState& model, const VectorXd& alpha, const VectorXd& u,
                               const MatrixXd& features) {
  if (features.rows() != model.spec.trunk_outputs()) throw DimensionError("trunk feature rows mismatch");
  return features.transpose() * trunk_coefficients(model, alpha, u);
}

MatrixXd gram_schmidt_trunks(const ModelState& model, const MatrixXd& quadrature_points) {
  const MatrixXd t = trunk_features(model, quadrature_points);
  const Eigen::Index n = t.rows();
  const double inv_q = 1.0 / static_cast<double>(t.cols());
  auto inner = [&](const Eigen::RowVectorXd& f, const Eigen::RowVectorXd& g) { return inv_q * f.dot(g); };

  MatrixXd z = MatrixXd::Zero(n, n);
  MatrixXd q(n, t.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::RowVectorXd v = t.row(k);
    Eigen::RowVectorXd zk = Eigen::RowVectorXd::Zero(n);
    zk(k) = 1.0;
    const double original = std::sqrt(inner(v, v));
    for (Eigen::Index j = 0; j < k; ++j) {
      const double proj = inner(v, q.row(j));
      v -= proj * q.row(j);
      zk -= proj * z.row(j);
    }
    const double norm = std::sqrt(inner(v, v));
    if (!(norm > 1e-10 * std::max(original, 1e-300)))
      throw DomainError("trunk " + std::to_string(k) + " is linearly dependent on trunks 0.." +
                        std::to_string(k > 0 ? k - 1 : 0) + " at the quadrature points");
    q.row(k) = v / norm;
    z.row(k) = zk / norm;
  }
  return z;
}

ModelState apply_trunk_transform(const ModelState& model, const MatrixXd& z) {
  const auto& s = model.spec;
  const int n = s.trunk_outputs();
  if (z.rows() != n || z.cols() != n) throw DimensionError("transform must be trunk_outputs x trunk_outputs");
  if (s.kind == ArchitectureKind::MIONet || (s.kind == ArchitectureKind::MNO && s.per_p_trunks))
    throw DomainError("trunk transform has no exact representation for " + std::string(to_string(s.kind)));

  const MatrixXd zit = z.inverse().transpose();
  ModelState out = model;
  auto& trunk_last = out.trunk.layers.back();
  trunk_last.weight = z * trunk_last.weight;
  trunk_last.bias = z * trunk_last.bias;

  const auto& b_last = model.branch.layers.back();
  auto& ob_last = out.branch.layers.back();
  switch (s.kind) {
    case ArchitectureKind::DeepONet:
    case ArchitectureKind::DeepONetC:
      ob_last.weight = zit * b_last.weight;
      ob_last.bias = zit * b_last.bias;
      break;
    case ArchitectureKind::MNO: {
      const int h = s.branch_count;
      for (int p = 0; p < *s.param_net_count; ++p) {
        ob_last.weight.middleRows(p * h, h) = zit * b_last.weight.middleRows(p * h, h);
        ob_last.bias.segment(p * h, h) = zit * b_last.bias.segment(p * h, h);
      }
      break;
    }
    case ArchitectureKind::MONet: {
      // c'_k = sum_{r,i} zit(k,r) b_ri L_ri: a MONet with M' = N*M whose
      // new entry (k, r, i) scales branch output (r, i) and copies L_ri.
      const int m = s.branch_count;
      const int m2 = n * m;
      const auto& l_last = model.param->layers.back();
      const Eigen::Index wb = b_last.weight.cols(), wl = l_last.weight.cols();
      MatrixXd bw(n * m2, wb), lw(n * m2, wl);
      VectorXd bb(n * m2), lb(n * m2);
      for (int k = 0; k < n; ++k)
        for (int r = 0; r < n; ++r)
          for (int i = 0; i < m; ++i) {
            const int dst = k * m2 + r * m + i, src = r * m + i;
            bw.row(dst) = zit(k, r) * b_last.weight.row(src);
            bb(dst) = zit(k, r) * b_last.bias(src);
            lw.row(dst) = l_last.weight.row(src);
            lb(dst) = l_last.bias(src);
          }
      ob_last.weight = std::move(bw);
      ob_last.bias = std::move(bb);
      out.param->layers.back().weight = std::move(lw);
      out.param->layers.back().bias = std::move(lb);
      out.spec.branch_count = m2;
      break;
    }
    default: break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

std::int64_t mlp_count(std::int64_t in, std::int64_t out, SubnetShape s) {
  if (s.depth == 1) return in * out + out;
  const std::int64_t w = s.width;
  return in * w + w + static_cast<std::int64_t>(s.depth - 2) * (w * w + w) + w * out + out;
}

struct PresetCounts {
  ArchitectureKind kind;
  int n, branch;
  std::optional<int> p;
  std::int64_t target;
};

PresetCounts preset_counts(std::string_view name, PresetScale scale) {
  const bool desk = scale == PresetScale::Desk;
  constexpr std::int64_t kDesk = 60'000;
  if (name == "deeponet") return {ArchitectureKind::DeepONet, 20, 20, {}, desk ? kDesk : 1'470'000};
  if (name == "deeponet-c") return {ArchitectureKind::DeepONetC, 20, 20, {}, desk ? kDesk : 1'470'000};
  if (name == "mionet") return desk ? PresetCounts{ArchitectureKind::MIONet, 30, 30, {}, kDesk}
                                    : PresetCounts{ArchitectureKind::MIONet, 75, 75, {}, 1'500'000};
  if (name == "monet") return desk ? PresetCounts{ArchitectureKind::MONet, 20, 10, 1, kDesk}
                                   : PresetCounts{ArchitectureKind::MONet, 20, 100, 1, 1'150'000};
  if (name == "mno-s") return {ArchitectureKind::MNO, 20, 20, 10, desk ? kDesk : 1'190'000};
  if (name == "mno-l") return desk ? PresetCounts{ArchitectureKind::MNO, 40, 40, 20, 4 * kDesk}
                                   : PresetCounts{ArchitectureKind::MNO, 100, 100, 40, 16'700'000};
  throw DomainError("unknown architecture preset '" + std::string(name) + "'");
}

}  // namespace

std::int64_t count_parameters(const ArchitectureSpec& s) {
  std::int64_t total = mlp_count(2, s.trunk_outputs(), s.trunk) + mlp_count(s.branch_input_dim(), s.branch_outputs(), s.branch);
  if (s.has_param_net()) total += mlp_count(s.param_input_dim(), s.param_outputs(), s.param);
  return total;
}

std::vector<std::string> preset_names() { return {"deeponet", "deeponet-c", "mionet", "monet", "mno-s", "mno-l"}; }

std::int64_t preset_target_parameters(std::string_view name, PresetScale scale) {
  return preset_counts(name, scale).target;
}

ArchitectureSpec make_preset(std::string_view name, int alpha_dim, PresetScale scale, int u_sensors) {
  const PresetCounts pc = preset_counts(name, scale);
  ArchitectureSpec s;
  s.kind = pc.kind;
  s.trunk_count = pc.n;
  s.branch_count = pc.branch;
  s.param_net_count = pc.p;
  s.u_sensors = u_sensors;
  s.alpha_dim = pc.kind == ArchitectureKind::DeepONet ? 0 : alpha_dim;

  // One shared hidden width for every subnetwork, chosen to land closest to
  // the preset's parameter budget.
  auto with_width = [&](int w) {
    ArchitectureSpec t = s;
    t.trunk = {6, w};
    t.branch = {4, w};
    t.param = {4, w};
    return t;
  };
  int lo = 1, hi = 8192;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (count_parameters(with_width(mid)) < pc.target) lo = mid + 1;
    else hi = mid;
  }
  int best = lo;
  if (lo > 1 && std::llabs(count_parameters(with_width(lo - 1)) - pc.target) <=
                    std::llabs(count_parameters(with_width(lo)) - pc.target))
    best = lo - 1;
  s = with_width(best);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Model checkpoint

namespace {
constexpr std::string_view kModelMagic = "MOLA1";
constexpr std::uint8_t kNoFamily = 0xFF;
}  // namespace

void write_model(const std::string& path, const ModelState& model, std::optional<std::uint8_t> family_tag) {
  check_model(model);
  const auto& s = model.spec;
  io::ByteWriter w;
  w.bytes(kModelMagic);
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.u8(s.per_p_trunks ? 1 : 0);
  w.u8(family_tag.value_or(kNoFamily));
  w.u32(static_cast<std::uint32_t>(s.trunk_count));
  w.u32(s.kind == ArchitectureKind::MNO ? 0u : static_cast<std::uint32_t>(s.branch_count));  // M
  w.u32(static_cast<std::uint32_t>(s.param_net_count.value_or(0)));                         // P
  w.u32(s.kind == ArchitectureKind::MNO ? static_cast<std::uint32_t>(s.branch_count) : 0u);  // H
  w.u32(static_cast<std::uint32_t>(s.u_sensors));
  w.u32(static_cast<std::uint32_t>(s.alpha_dim));
  for (const SubnetShape& sh : {s.trunk, s.branch, s.param}) {
    w.u32(static_cast<std::uint32_t>(sh.depth));
    w.u32(static_cast<std::uint32_t>(sh.width));
  }
  encode_mlp(w, spec_of(model.trunk), model.trunk);
  encode_mlp(w, spec_of(model.branch), model.branch);
  if (model.param) encode_mlp(w, spec_of(*model.param), *model.param);
  io::write_file(path, w.data());
}

ModelFile read_model(const std::string& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes);
  if (r.bytes(kModelMagic.size()) != kModelMagic) throw FormatError("bad magic in model checkpoint");
  ModelFile f;
  auto& s = f.model.spec;
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ArchitectureKind::MNO)) throw FormatError("unknown architecture tag");
  s.kind = static_cast<ArchitectureKind>(kind);
  s.per_p_trunks = r.u8() != 0;
  if (std::uint8_t fam = r.u8(); fam != kNoFamily) f.family_tag = fam;
  s.trunk_count = static_cast<int>(r.u32());
  const auto m = static_cast<int>(r.u32());
  const auto p = static_cast<int>(r.u32());
  const auto h = static_cast<int>(r.u32());
  s.branch_count = s.kind == ArchitectureKind::MNO ? h : m;
  if (p > 0) s.param_net_count = p;
  s.u_sensors = static_cast<int>(r.u32());
  s.alpha_dim = static_cast<int>(r.u32());
  for (SubnetShape* sh : {&s.trunk, &s.branch, &s.param}) {
    sh->depth = static_cast<int>(r.u32());
    sh->width = static_cast<int>(r.u32());
  }
  f.model.trunk = decode_mlp(r).params;
  f.model.branch = decode_mlp(r).params;
  if (s.has_param_net()) f.model.param = decode_mlp(r).params;
  if (r.remaining() != 0) throw FormatError("trailing bytes after model checkpoint");
  check_model(f.model);
  return f;
}

}  // namespace molab
