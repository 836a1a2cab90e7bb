#include "cope/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "cope/losses.hpp"
#include "cope/rng.hpp"

namespace cope {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void MetricsTrace::add(std::vector<double> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("metrics: row has " + std::to_string(row.size()) + " values for " +
                                std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

std::string MetricsTrace::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += '\n';
  }
  return out;
}

static void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void MetricsTrace::write_csv(const std::filesystem::path& path) const { write_text(path, to_csv()); }

TrainingDiverged::TrainingDiverged(std::size_t step, MetricsTrace trace)
    : std::runtime_error("training diverged at step " + std::to_string(step) + " (non-finite loss)"),
      step_(step),
      trace_(std::move(trace)) {}

namespace {

double scheduled_lr(const RegressionOptions& opt, std::size_t step) {
  if (opt.schedule == LrSchedule::Constant || opt.steps <= 1) return opt.adam.lr;
  const double t = static_cast<double>(step) / static_cast<double>(opt.steps - 1);
  return opt.lr_min + 0.5 * (opt.adam.lr - opt.lr_min) * (1 + std::cos(std::numbers::pi * t));
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(idx[i], j);
  return out;
}

Matrix stack_rows(std::span<const Matrix> parts) {
  std::size_t rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().cols());
  std::size_t r = 0;
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.rows(); ++i, ++r)
      for (std::size_t j = 0; j < p.cols(); ++j) out(r, j) = p(i, j);
  return out;
}

}  // namespace

RegressionResult train_regression(const RegressionData& data, ModelSpec& model, const RegressionOptions& opt) {
  data.validate();
  model.validate();
  if (model.variable_dims.size() != data.variables.size())
    throw std::invalid_argument("train_regression: model takes " + std::to_string(model.variable_dims.size()) +
                                " variables, data has " + std::to_string(data.variables.size()));
  for (std::size_t i = 0; i < data.variables.size(); ++i)
    if (data.variables[i].cols() != model.variable_dims[i])
      throw std::invalid_argument("train_regression: variable " + std::to_string(i) + " dim mismatch");
  if (model.output_dim() != data.targets.cols())
    throw std::invalid_argument("train_regression: model output dim differs from target dim");
  if (opt.log_every == 0) throw std::invalid_argument("train_regression: log_every must be positive");

  ParameterSet params(model);
  OptState state = make_adam_state(params.pointers(), opt.adam);
  auto batch_rng = make_stream(opt.seed, "batch");
  const bool full = opt.batch_size == 0 || opt.batch_size >= data.samples();

  RegressionResult result;
  result.trace.columns = {"step", "loss", "lr"};
  std::vector<std::size_t> idx(full ? 0 : opt.batch_size);
  for (std::size_t step = 0; step < opt.steps; ++step) {
    ad::Tape tape;
    std::vector<ad::NodeId> vars;
    Matrix target;
    if (full) {
      for (const auto& v : data.variables) vars.push_back(tape.constant(v));
      target = data.targets;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, data.samples() - 1);
      for (auto& i : idx) i = pick(batch_rng);
      for (const auto& v : data.variables) vars.push_back(tape.constant(gather_rows(v, idx)));
      target = gather_rows(data.targets, idx);
    }
    const ad::NodeId loss = tape.mse(product_compose(tape, params, model, vars), target);
    const double value = tape.scalar(loss);
    state.config.lr = scheduled_lr(opt, step);
    if (step % opt.log_every == 0) result.trace.add({static_cast<double>(step), value, state.config.lr});
    if (!std::isfinite(value)) throw TrainingDiverged(step, std::move(result.trace));
    adam_step(state, tape.backward(loss), params.pointers());
  }
  result.final_mse = mse_loss(product_compose(model, data.variables), data.targets);
  if (!std::isfinite(result.final_mse)) throw TrainingDiverged(opt.steps, std::move(result.trace));
  result.trace.add({static_cast<double>(opt.steps), result.final_mse, state.config.lr});
  return result;
}

namespace {

Matrix draw_noise(NoiseKind kind, std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  return kind == NoiseKind::Uniform ? sample_uniform(n, dim, -1.0, 1.0, rng) : sample_normal(n, dim, 0.0, 1.0, rng);
}

// Batch rows per class: as even as possible, earlier classes take the rest.
std::vector<std::size_t> class_counts(std::size_t total, std::size_t classes) {
  std::vector<std::size_t> counts(classes, total / classes);
  for (std::size_t c = 0; c < total % classes; ++c) ++counts[c];
  return counts;
}

// Tiny MLP critic on [x; one-hot]: two leaky-ReLU hidden layers.
struct Discriminator {
  std::vector<Matrix> layers;  // W1, b1, W2, b2, W3, b3

  Discriminator(std::size_t in, std::size_t hidden, std::mt19937_64& rng) {
    const std::size_t dims[] = {in, hidden, hidden, 1};
    for (std::size_t l = 0; l < 3; ++l) {
      const double s = 1.0 / std::sqrt(static_cast<double>(dims[l]));
      layers.push_back(sample_uniform(dims[l], dims[l + 1], -s, s, rng));
      layers.emplace_back(1, dims[l + 1]);
    }
  }

  std::vector<Matrix*> pointers() {
    std::vector<Matrix*> out;
    for (auto& m : layers) out.push_back(&m);
    return out;
  }

  ad::NodeId forward(ad::Tape& tape, ad::NodeId x, bool trainable) const {
    auto leaf = [&](std::size_t i) { return trainable ? tape.parameter(i, layers[i]) : tape.constant(layers[i]); };
    ad::NodeId h = x;
    for (std::size_t l = 0; l < 3; ++l) {
      h = tape.add_row(tape.matmul(h, leaf(2 * l)), leaf(2 * l + 1));
      if (l < 2) h = tape.leaky_relu(h, 0.2);
    }
    return h;
  }
};


}  // namespace

ConditionalResult train_conditional_generator(const CondPointCloud& task, ModelSpec& model,
                                              const ConditionalOptions& opt) {
  task.validate();
  model.validate();
  const std::size_t K = task.classes();
  if (model.variable_dims.size() != 2 || model.variable_dims[1] != K)
    throw std::invalid_argument("train_conditional_generator: model must take (noise, one-hot of " +
                                std::to_string(K) + " classes)");
  if (model.output_dim() != 2) throw std::invalid_argument("train_conditional_generator: model must output 2D points");
  if (opt.batch_size < 2 * K) throw std::invalid_argument("train_conditional_generator: batch_size below 2 per class");
  if (opt.log_every == 0) throw std::invalid_argument("train_conditional_generator: log_every must be positive");
  const std::size_t noise_dim = model.variable_dims[0];

  ParameterSet params(model);
  OptState state = make_adam_state(params.pointers(), opt.adam);
  auto data_rng = make_stream(opt.seed, "data");
  auto noise_rng = make_stream(opt.seed, "noise");
  auto disc_rng = make_stream(opt.seed, "disc-init");

  const auto counts = class_counts(opt.batch_size, K);
  std::vector<Matrix> onehots;
  for (std::size_t c = 0; c < K; ++c) onehots.push_back(one_hot_rows(K, c, counts[c]));
  const Matrix labels = stack_rows(onehots);

  std::optional<Discriminator> disc;
  std::optional<OptState> disc_state;
  std::vector<Matrix*> disc_ptrs;
  if (opt.loss == GeneratorLoss::Gan) {
    disc.emplace(2 + K, opt.disc_hidden, disc_rng);
    disc_ptrs = disc->pointers();
    disc_state = make_adam_state(disc_ptrs, opt.disc_adam);
  }

  ConditionalResult result;
  result.trace.columns = opt.loss == GeneratorLoss::Mmd ? std::vector<std::string>{"step", "loss"}
                                                        : std::vector<std::string>{"step", "loss_g", "loss_d"};
  if (opt.diversity_weight > 0) result.trace.columns.push_back("diversity");

  for (std::size_t step = 0; step < opt.steps; ++step) {
    std::vector<Matrix> real_parts;
    for (std::size_t c = 0; c < K; ++c) real_parts.push_back(sample_class(task, c, counts[c], data_rng));
    const Matrix noise = draw_noise(opt.noise, opt.batch_size, noise_dim, noise_rng);

    double loss_d = 0.0;
    if (disc) {
      const Matrix fake = product_compose(model, std::vector<Matrix>{noise, labels});
      ad::Tape dt;
      const ad::NodeId lab = dt.constant(labels);
      const ad::NodeId real_logits = disc->forward(dt, dt.concat_cols(dt.constant(stack_rows(real_parts)), lab), true);
      const ad::NodeId fake_logits = disc->forward(dt, dt.concat_cols(dt.constant(fake), lab), true);
      const ad::NodeId ld = dt.add(dt.mean(dt.softplus(dt.scale(real_logits, -1.0))), dt.mean(dt.softplus(fake_logits)));
      loss_d = dt.scalar(ld);
      if (!std::isfinite(loss_d)) throw TrainingDiverged(step, std::move(result.trace));
      adam_step(*disc_state, dt.backward(ld), disc_ptrs);
    }

    ad::Tape tape;
    const ad::NodeId lab = tape.constant(labels);
    const ad::NodeId gen = product_compose(tape, params, model, std::vector<ad::NodeId>{tape.constant(noise), lab});
    ad::NodeId loss;
    if (disc) {
      const ad::NodeId logits = disc->forward(tape, tape.concat_cols(gen, lab), false);
      loss = tape.mean(tape.softplus(tape.scale(logits, -1.0)));
    } else {
      std::size_t begin = 0;
      std::optional<ad::NodeId> total;
      for (std::size_t c = 0; c < K; ++c) {
        const auto bw = median_bandwidths(real_parts[c]);
        const ad::NodeId term = tape.mmd_rbf(tape.rows(gen, begin, begin + counts[c]), real_parts[c], bw);
        total = total ? tape.add(*total, term) : term;
        begin += counts[c];
      }
      loss = tape.scale(*total, 1.0 / static_cast<double>(K));
    }
    const double main_loss = tape.scalar(loss);

    double diversity = 0.0;
    if (opt.diversity_weight > 0) {
      const Matrix noise2 = draw_noise(opt.noise, opt.batch_size, noise_dim, noise_rng);
      const ad::NodeId gen2 = product_compose(tape, params, model, std::vector<ad::NodeId>{tape.constant(noise2), lab});
      const ad::NodeId div = diversity_term(tape, gen, gen2, noise, noise2, opt.diversity_tau);
      diversity = tape.scalar(div);
      loss = tape.sub(loss, tape.scale(div, opt.diversity_weight));
    }

    if (step % opt.log_every == 0) {
      std::vector<double> row{static_cast<double>(step), main_loss};
      if (disc) row.push_back(loss_d);
      if (opt.diversity_weight > 0) row.push_back(diversity);
      result.trace.add(std::move(row));
    }
    if (!std::isfinite(tape.scalar(loss))) throw TrainingDiverged(step, std::move(result.trace));
    adam_step(state, tape.backward(loss), params.pointers());
  }

  // Evaluation: per-class samples, nearest-center accuracy, class means.
  auto eval_rng = make_stream(opt.seed, "eval");
  const auto eval_counts = class_counts(opt.eval_samples, K);
  result.class_means = Matrix(K, 2);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < K; ++c) {
    const Matrix z = draw_noise(opt.noise, eval_counts[c], noise_dim, eval_rng);
    const Matrix out = product_compose(model, std::vector<Matrix>{z, one_hot_rows(K, c, eval_counts[c])});
    for (std::size_t i = 0; i < out.rows(); ++i) {
      result.samples.push_back({c, out(i, 0), out(i, 1)});
      correct += nearest_center(task, out.row(i)) == c;
      result.class_means(c, 0) += out(i, 0) / static_cast<double>(out.rows());
      result.class_means(c, 1) += out(i, 1) / static_cast<double>(out.rows());
    }
  }
  result.accuracy = result.samples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(result.samples.size());

  // Fixed-noise sweep between consecutive classes.
  auto sweep_rng = make_stream(opt.seed, "sweep");
  const Matrix z = draw_noise(opt.noise, 1, noise_dim, sweep_rng);
  result.sweep_ok = true;
  if (K >= 2 && opt.sweep_points >= 2) {
    for (std::size_t a = 0; a < K; ++a) {
      const std::size_t b = (a + 1) % K;
      for (std::size_t s = 0; s < opt.sweep_points; ++s) {
        const double alpha = static_cast<double>(s) / static_cast<double>(opt.sweep_points - 1);
        Matrix code(1, K);
        code(0, a) += 1 - alpha;
        code(0, b) += alpha;
        const Matrix out = product_compose(model, std::vector<Matrix>{z, code});
        const std::size_t nearest = nearest_center(task, out.row(0));
        result.sweep.push_back({a, b, alpha, out(0, 0), out(0, 1), nearest});
        if (s == 0 && nearest != a) result.sweep_ok = false;
        if (s + 1 == opt.sweep_points && nearest != b) result.sweep_ok = false;
      }
    }
  }
  return result;
}

std::string samples_csv(const std::vector<SampleRow>& rows) {
  std::ostringstream out;
  out << "class,x,y\n";
  for (const auto& r : rows) out << r.cls << ',' << format_double(r.x) << ',' << format_double(r.y) << '\n';
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "from,to,alpha,x,y,nearest\n";
  for (const auto& r : rows)
    out << r.from << ',' << r.to << ',' << format_double(r.alpha) << ',' << format_double(r.x) << ','
        << format_double(r.y) << ',' << r.nearest << '\n';
  return out.str();
}

}  // namespace cope
