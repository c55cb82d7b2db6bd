#include "rnli/classifier.hpp"

#include <stdexcept>

#include "json.hpp"
#include "rnli/checkpoint.hpp"
#include "rnli/errors.hpp"

namespace rnli {

ModelConfig ModelConfig::defaults(EncoderKind kind) {
  ModelConfig c;
  c.encoder = EncoderConfig::defaults(kind);
  return c;
}

void ModelConfig::validate() const {
  encoder.validate();
  if (d_c == 0) throw std::invalid_argument("d_c must be positive");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["encoder"] = std::string(encoder_name(encoder.kind));
  j["d_emb"] = encoder.d_emb;
  j["d_hidden"] = encoder.d_hidden;
  j["init_scale"] = encoder.init_scale;
  j["vocabulary_size"] = encoder.vocabulary_size();
  j["d_c"] = d_c;
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto kind = encoder_from_name(j.at("encoder").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown encoder kind in model config");
  ModelConfig c = defaults(*kind);
  c.encoder.d_emb = j.at("d_emb").get<std::size_t>();
  c.encoder.d_hidden = j.at("d_hidden").get<std::size_t>();
  c.encoder.init_scale = j.at("init_scale").get<double>();
  c.d_c = j.at("d_c").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

PreparedExample prepare(const Example& e) {
  return PreparedExample{compile_sentence(e.premise), compile_sentence(e.hypothesis), e.label, e.bin};
}

std::vector<PreparedExample> prepare_all(std::span<const Example> examples) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const Example& e : examples) out.push_back(prepare(e));
  return out;
}

Relation argmax_relation(std::span<const double> logits) {
  if (logits.size() != kNumRelations) {
    throw ShapeMismatch("argmax_relation", std::to_string(kNumRelations) + " logits",
                        std::to_string(logits.size()));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return relation_at(static_cast<int>(best));
}

// ---------------------------------------------------------------------------

namespace {

Encoder create_encoder(const ModelConfig& config, ParamStore& store) {
  config.validate();
  Rng rng(Rng::derive(config.seed, 0));
  return Encoder::create(config.encoder, store, rng);
}

}  // namespace

Model::Model(const ModelConfig& config)
    : config_(config), params_(), encoder_(create_encoder(config_, params_)) {
  wire_classifier(true);
}

Model::Model(const ModelConfig& config, ParamStore params)
    : config_(config), params_(std::move(params)), encoder_(Encoder::bind(config_.encoder, params_)) {
  wire_classifier(false);
}

void Model::wire_classifier(bool create) {
  const std::size_t h = config_.encoder.d_hidden;
  const std::size_t dc = config_.d_c;
  const double scale = config_.encoder.init_scale;
  Rng rng(Rng::derive(config_.seed, 1));

  auto make = [&](const std::string& name, Shape shape, bool weight) {
    if (!create) {
      const ParamId id = params_.id(name);
      if (params_.value(id).shape() != shape) {
        throw ShapeMismatch("Model " + name, shape.to_string(), params_.value(id).shape().to_string());
      }
      return id;
    }
    Tensor t(shape);
    if (weight) {
      for (double& v : t.values()) v = rng.uniform(-scale, scale);
    }
    return params_.add(name, std::move(t));
  };
  auto layer = [&](const std::string& name, std::size_t out, std::size_t in) {
    Layer l;
    l.w = make("cls." + name + ".W", Shape::matrix(out, in), true);
    l.b = make("cls." + name + ".b", Shape::vector(out), false);
    return l;
  };

  combine_ = layer("combine", dc, 2 * h);
  tensor_ = make("cls.combine.T", Shape::cube(dc, h, h), true);
  hidden1_ = layer("hidden1", dc, dc);
  hidden2_ = layer("hidden2", dc, dc);
  output_ = layer("softmax", kNumRelations, dc);
}

Var Model::combine_ntn(Graph& g, Var left, Var right) const {
  const Var nn = g.tanh(g.add(g.matmul(g.param(combine_.w), g.concat(left, right)), g.param(combine_.b)));
  return g.add(nn, g.tanh(g.bilinear(left, g.param(tensor_), right)));
}

Var Model::logits(Graph& g, const SentenceInput& premise, const SentenceInput& hypothesis) const {
  const Var l = encoder_.encode(g, premise);
  const Var r = encoder_.encode(g, hypothesis);
  Var x = combine_ntn(g, l, r);
  for (const Layer* layer : {&hidden1_, &hidden2_}) {
    x = g.tanh(g.add(g.matmul(g.param(layer->w), x), g.param(layer->b)));
  }
  return g.add(g.matmul(g.param(output_.w), x), g.param(output_.b));
}

Logits Model::predict_logits(const SentenceInput& premise, const SentenceInput& hypothesis) const {
  Graph g(params_);
  const auto v = g.value(logits(g, premise, hypothesis));
  Logits out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

Relation Model::predict(const PreparedExample& e) const {
  return argmax_relation(predict_logits(e.premise, e.hypothesis));
}

double Model::example_loss(const PreparedExample& e) const {
  Graph g(params_);
  return g.scalar(g.softmax_nll(logits(g, e.premise, e.hypothesis), index_of(e.label)));
}

double Model::batch_objective(std::span<const PreparedExample> batch, double lambda, Gradients* grads) const {
  if (batch.empty()) throw EmptyDataset("empty minibatch");
  const double weight = 1.0 / static_cast<double>(batch.size());
  Graph g;
  double total = 0.0;
  for (const PreparedExample& e : batch) {
    g.reset(params_, grads);
    const Var loss = g.softmax_nll(logits(g, e.premise, e.hypothesis), index_of(e.label));
    total += g.scalar(loss);
    if (grads) g.backward(loss, weight);
  }
  if (grads) add_l2_gradient(params_, lambda, *grads);
  return total * weight + l2_penalty(params_, lambda);
}

void Model::save(const std::filesystem::path& path) const {
  save_checkpoint(path, params_, config_.to_json());
}

Model Model::load(const std::filesystem::path& path) {
  Checkpoint ck = load_checkpoint(path);
  return Model(ModelConfig::from_json(ck.config_json), std::move(ck.store));
}

}  // namespace rnli
