#include "citegcn/gcn.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <vector>

#include "citegcn/errors.hpp"
#include "citegcn/rng.hpp"
#include "doctest.h"

using namespace citegcn;
using namespace citegcn::gcn;
using corpus::PaperId;
using corpus::PaperRecord;

namespace {

PaperRecord paper(PaperId id, int year, std::vector<PaperId> refs = {}) {
  PaperRecord rec;
  rec.id = id;
  rec.year = year;
  rec.authors = {"A"};
  rec.venue = "V";
  rec.references = std::move(refs);
  return rec;
}

graph::NormalizedAdjacency identity_adjacency(std::size_t n) {
  std::vector<PaperRecord> records;
  for (std::size_t i = 0; i < n; ++i)
    records.push_back(paper(static_cast<PaperId>(i), 2000));
  auto snap = corpus::build_snapshot(records, 2000);
  std::vector<PaperId> ids;
  for (const auto& [id, rec] : snap.papers) ids.push_back(id);
  return graph::normalized_adjacency(graph::build_citation_graph(snap, ids));
}

graph::NormalizedAdjacency random_adjacency(std::size_t n, Rng& rng) {
  std::vector<PaperRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<PaperId> refs;
    if (i > 0) {
      const std::size_t want = std::min<std::size_t>(1 + rng.next_below(3), i);
      while (refs.size() < want) refs.insert(static_cast<PaperId>(rng.next_below(i)));
    }
    records.push_back(paper(static_cast<PaperId>(i), 2000,
                            std::vector<PaperId>(refs.begin(), refs.end())));
  }
  auto snap = corpus::build_snapshot(records, 2000);
  std::vector<PaperId> ids;
  for (const auto& [id, rec] : snap.papers) ids.push_back(id);
  return graph::normalized_adjacency(graph::build_citation_graph(snap, ids));
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

// Plain two-layer ReLU network ignoring the graph entirely.
std::vector<double> mlp_oracle(const GcnModel& model, const Matrix& x) {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::vector<double> h1(model.dims.hidden1, 0.0);
    for (std::size_t j = 0; j < model.dims.hidden1; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < model.dims.in; ++k)
        sum += x(i, k) * model.w0(k, j);
      h1[j] = std::max(sum, 0.0);
    }
    std::vector<double> h2(model.dims.hidden2, 0.0);
    for (std::size_t j = 0; j < model.dims.hidden2; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < model.dims.hidden1; ++k)
        sum += h1[k] * model.w1(k, j);
      h2[j] = std::max(sum, 0.0);
    }
    double y = model.bias;
    for (std::size_t k = 0; k < model.dims.hidden2; ++k)
      y += h2[k] * model.w_out(k, 0);
    out[i] = y;
  }
  return out;
}

double tensor_rel_error(const std::vector<double>& analytic,
                        const std::vector<double>& numeric) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    scale += analytic[i] * analytic[i] + numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12);
}

}  // namespace

TEST_SUITE("gcn") {

TEST_CASE("init is deterministic and shaped by dims") {
  auto a = init({4, 8, 8}, 42);
  auto b = init({4, 8, 8}, 42);
  CHECK(a.w0.rows == 4);
  CHECK(a.w0.cols == 8);
  CHECK(a.w1.rows == 8);
  CHECK(a.w_out.rows == 8);
  CHECK(a.w_out.cols == 1);
  CHECK(a.bias == 0.0);
  CHECK(a.w0.data == b.w0.data);
  CHECK(a.w1.data == b.w1.data);
  auto c = init({4, 8, 8}, 43);
  CHECK(a.w0.data != c.w0.data);
}

TEST_CASE("zero input passes the bias through") {
  auto adj = identity_adjacency(3);
  auto model = init({2, 4, 4}, 1);
  model.bias = 2.5;
  Matrix x(3, 2);
  auto cache = forward(model, adj, x);
  for (double v : cache.predictions) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("identity adjacency reduces to the plain network") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    auto adj = identity_adjacency(12);
    auto model = init({6, 9, 7}, seed * 100);
    model.bias = rng.uniform(-1, 1);
    Matrix x = random_matrix(12, 6, rng);
    auto cache = forward(model, adj, x);
    auto oracle = mlp_oracle(model, x);
    for (std::size_t i = 0; i < oracle.size(); ++i)
      CHECK(std::abs(cache.predictions[i] - oracle[i]) <= 1e-10);
  }
}

TEST_CASE("two-node scalar weights match the pencil evaluation") {
  auto snap = corpus::build_snapshot({paper(0, 2000, {1}), paper(1, 1999)}, 2000);
  auto adj = graph::normalized_adjacency(graph::build_citation_graph(snap, {0, 1}));

  GcnModel model;
  model.dims = {1, 1, 1};
  model.w0 = Matrix(1, 1);
  model.w0(0, 0) = 1.0;
  model.w1 = Matrix(1, 1);
  model.w1(0, 0) = 2.0;
  model.w_out = Matrix(1, 1);
  model.w_out(0, 0) = 0.5;
  model.bias = 1.0;

  Matrix x(2, 1);
  x(0, 0) = 2.0;
  x(1, 0) = 4.0;
  // AX = [3,3]; H1 = [3,3]; AH1 = [3,3]; H2 = [6,6]; y = 0.5*6 + 1 = 4
  auto cache = forward(model, adj, x);
  CHECK(cache.predictions[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(cache.predictions[1] == doctest::Approx(4.0).epsilon(1e-12));

  x(1, 0) = -4.0;  // AX = [-1,-1]; ReLU kills both units; y = bias
  auto dead = forward(model, adj, x);
  CHECK(dead.predictions[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("masked mse fixtures") {
  std::vector<double> preds = {1.0, 3.0, 5.0};
  std::vector<double> targets = {1.0, 1.0, 5.0};
  CHECK(masked_mse(preds, preds, {0, 1, 2}) == 0.0);
  CHECK(masked_mse(preds, targets, {1}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(masked_mse(preds, targets, {1, 1}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(masked_mse(preds, targets, {}), ConfigError);
}

TEST_CASE("gradients vanish at a zero-loss point") {
  auto adj = identity_adjacency(4);
  GcnModel model;
  model.dims = {2, 3, 3};
  model.w0 = Matrix(2, 3);
  model.w1 = Matrix(3, 3);
  model.w_out = Matrix(3, 1);
  model.bias = 7.0;
  Matrix x(4, 2);
  std::vector<double> targets(4, 7.0);
  auto cache = forward(model, adj, x);
  auto g = backward(model, adj, cache, targets, {0, 1, 2, 3});
  for (double v : g.w0.data) CHECK(v == 0.0);
  for (double v : g.w1.data) CHECK(v == 0.0);
  for (double v : g.w_out.data) CHECK(v == 0.0);
  CHECK(g.bias == 0.0);
}

TEST_CASE("bias gradient is twice the mean masked residual") {
  Rng rng(8);
  auto adj = random_adjacency(10, rng);
  auto model = init({3, 5, 5}, 21);
  Matrix x = random_matrix(10, 3, rng);
  std::vector<double> targets(10);
  for (auto& t : targets) t = rng.uniform(-2, 2);
  std::vector<std::size_t> mask = {1, 4, 7};
  auto cache = forward(model, adj, x);
  auto g = backward(model, adj, cache, targets, mask);
  double expect = 0.0;
  for (std::size_t i : mask) expect += 2.0 * (cache.predictions[i] - targets[i]) / 3.0;
  CHECK(g.bias == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 1000 + 7);
    const std::size_t n = 20;
    auto adj = random_adjacency(n, rng);
    Matrix x = random_matrix(n, 8, rng);
    std::vector<double> targets(n);
    for (auto& t : targets) t = rng.uniform(-3, 3);
    std::vector<std::size_t> mask;
    for (std::size_t i = 0; i < n; i += 2) mask.push_back(i);

    auto model = init({8, 6, 5}, seed);
    auto loss_at = [&]() {
      auto cache = forward(model, adj, x);
      return masked_mse(cache.predictions, targets, mask);
    };
    auto cache = forward(model, adj, x);
    auto analytic = backward(model, adj, cache, targets, mask);

    const double h = 1e-5;
    auto fd_tensor = [&](Matrix& tensor) {
      std::vector<double> numeric(tensor.data.size());
      for (std::size_t i = 0; i < tensor.data.size(); ++i) {
        const double saved = tensor.data[i];
        tensor.data[i] = saved + h;
        const double up = loss_at();
        tensor.data[i] = saved - h;
        const double down = loss_at();
        tensor.data[i] = saved;
        numeric[i] = (up - down) / (2.0 * h);
      }
      return numeric;
    };

    CHECK(tensor_rel_error(analytic.w0.data, fd_tensor(model.w0)) < 1e-4);
    CHECK(tensor_rel_error(analytic.w1.data, fd_tensor(model.w1)) < 1e-4);
    CHECK(tensor_rel_error(analytic.w_out.data, fd_tensor(model.w_out)) < 1e-4);

    const double saved = model.bias;
    model.bias = saved + h;
    const double up = loss_at();
    model.bias = saved - h;
    const double down = loss_at();
    model.bias = saved;
    CHECK(tensor_rel_error({analytic.bias}, {(up - down) / (2.0 * h)}) < 1e-4);
  }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  AdamConfig cfg;
  Adam opt(3, cfg);
  std::vector<double> params = {1.0, -2.0, 0.5};
  std::vector<double> grads(3, 0.0);
  for (int t = 0; t < 10; ++t) opt.step(params, grads);
  CHECK(params == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("adam scalar first step") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam opt(1, cfg);
  std::vector<double> params = {0.0};
  std::vector<double> grads = {1.0};
  opt.step(params, grads);
  CHECK(params[0] == doctest::Approx(-0.1).epsilon(1e-7));
  CHECK(opt.timestep() == 1);
}

TEST_CASE("adam minimizes a parabola") {
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  Adam opt(1, cfg);
  std::vector<double> w = {1.0};
  for (int t = 0; t < 100; ++t) {
    std::vector<double> g = {2.0 * w[0]};
    opt.step(w, g);
  }
  CHECK(std::abs(w[0]) < 0.5);
}

TEST_CASE("training fits a linear neighborhood target") {
  Rng rng(17);
  const std::size_t n = 30;
  auto adj = random_adjacency(n, rng);
  Matrix x = random_matrix(n, 4, rng);
  auto ax = graph::spmm(adj, x);
  std::vector<double> targets(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 4; ++j) targets[i] += 3.0 * ax(i, j);

  std::vector<std::size_t> mask;
  for (std::size_t i = 0; i < n; ++i) mask.push_back(i);

  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 0.05;
  cfg.dropout_rate = 0.0;
  cfg.hidden1 = 16;
  cfg.hidden2 = 16;
  cfg.seed = 5;
  auto trained = train(adj, x, targets, mask, cfg);
  REQUIRE(trained.loss_history.size() == 200);
  CHECK(trained.loss_history.back() < 0.1 * trained.loss_history.front());
}

TEST_CASE("bad train configs are rejected") {
  Rng rng(1);
  auto adj = random_adjacency(5, rng);
  Matrix x = random_matrix(5, 2, rng);
  std::vector<double> targets(5, 1.0);
  std::vector<std::size_t> mask = {0, 1};
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(adj, x, targets, mask, cfg), ConfigError);
  cfg.epochs = 1;
  cfg.dropout_rate = 1.0;
  CHECK_THROWS_AS(train(adj, x, targets, mask, cfg), ConfigError);
  cfg.dropout_rate = 0.2;
  CHECK_THROWS_AS(train(adj, x, targets, {}, cfg), DataError);
}

TEST_CASE("training is deterministic per seed including dropout") {
  Rng rng(23);
  auto adj = random_adjacency(12, rng);
  Matrix x = random_matrix(12, 3, rng);
  std::vector<double> targets(12, 2.0);
  std::vector<std::size_t> mask = {0, 2, 4, 6, 8, 10};
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.dropout_rate = 0.2;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  cfg.seed = 99;
  auto a = train(adj, x, targets, mask, cfg);
  auto b = train(adj, x, targets, mask, cfg);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.model.w0.data == b.model.w0.data);
  cfg.seed = 100;
  auto c = train(adj, x, targets, mask, cfg);
  CHECK(a.loss_history != c.loss_history);
}

TEST_CASE("prediction clamps below zero and is repeatable") {
  auto adj = identity_adjacency(2);
  TrainedModel trained;
  trained.model.dims = {1, 1, 1};
  trained.model.w0 = Matrix(1, 1);
  trained.model.w1 = Matrix(1, 1);
  trained.model.w_out = Matrix(1, 1);
  trained.model.bias = -0.3;
  trained.adjacency_fingerprint = graph::fingerprint(adj);
  Matrix x(2, 1);
  auto preds = predict(trained, adj, x);
  CHECK(preds == std::vector<double>{0.0, 0.0});
  CHECK(predict(trained, adj, x) == preds);
}

TEST_CASE("prediction rejects a different graph") {
  Rng rng(3);
  auto adj = random_adjacency(6, rng);
  Matrix x = random_matrix(6, 2, rng);
  std::vector<double> targets(6, 1.0);
  std::vector<std::size_t> mask = {0, 1, 2};
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  auto trained = train(adj, x, targets, mask, cfg);
  auto other = identity_adjacency(6);
  CHECK_THROWS_AS(predict(trained, other, x), DataError);
}

TEST_CASE("log target transform inverts at prediction") {
  Rng rng(29);
  auto adj = random_adjacency(15, rng);
  Matrix x = random_matrix(15, 3, rng);
  std::vector<double> targets(15);
  for (auto& t : targets) t = static_cast<double>(rng.next_below(50));
  std::vector<std::size_t> mask;
  for (std::size_t i = 0; i < 15; ++i) mask.push_back(i);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 0.01;
  cfg.dropout_rate = 0.0;
  cfg.hidden1 = 12;
  cfg.hidden2 = 12;
  cfg.log_targets = true;
  auto trained = train(adj, x, targets, mask, cfg);
  auto preds = predict(trained, adj, x);
  for (double p : preds) {
    CHECK(p >= 0.0);
    CHECK(std::isfinite(p));
  }
  // loss history is in transformed units and must have improved
  CHECK(trained.loss_history.back() < trained.loss_history.front());

  std::vector<double> negative_targets = {-1.0};
  TrainConfig bad = cfg;
  auto one = identity_adjacency(1);
  Matrix x1(1, 3);
  CHECK_THROWS_AS(train(one, x1, negative_targets, {0}, bad), DataError);
}

TEST_CASE("permuting nodes permutes predictions") {
  Rng rng(41);
  const std::size_t n = 14;
  std::vector<PaperRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<PaperId> refs;
    if (i > 0) {
      const std::size_t want = std::min<std::size_t>(rng.next_below(3), i);
      while (refs.size() < want) refs.insert(static_cast<PaperId>(rng.next_below(i)));
    }
    records.push_back(paper(static_cast<PaperId>(i), 2000,
                            std::vector<PaperId>(refs.begin(), refs.end())));
  }
  auto snap = corpus::build_snapshot(records, 2000);
  std::vector<PaperId> ids;
  for (const auto& [id, rec] : snap.papers) ids.push_back(id);
  std::vector<PaperId> rev(ids.rbegin(), ids.rend());

  auto adj_fwd = graph::normalized_adjacency(graph::build_citation_graph(snap, ids));
  auto adj_rev = graph::normalized_adjacency(graph::build_citation_graph(snap, rev));

  auto model = init({3, 6, 6}, 7);
  Matrix x = random_matrix(n, 3, rng);
  Matrix x_rev(n, 3);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 3; ++j) x_rev(n - 1 - i, j) = x(i, j);

  auto fwd = forward(model, adj_fwd, x);
  auto bwd = forward(model, adj_rev, x_rev);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(fwd.predictions[i] - bwd.predictions[n - 1 - i]) <= 1e-9);
}

TEST_CASE("model file round trips") {
  Rng rng(31);
  auto adj = random_adjacency(8, rng);
  Matrix x = random_matrix(8, 2, rng);
  std::vector<double> targets(8, 3.0);
  std::vector<std::size_t> mask = {0, 1, 2, 3};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.hidden1 = 4;
  cfg.hidden2 = 3;
  auto trained = train(adj, x, targets, mask, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "citegcn_gcn_model";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();
  save_model(trained, path);
  auto loaded = load_model(path);
  CHECK(loaded.model.w0.data == trained.model.w0.data);
  CHECK(loaded.model.w1.data == trained.model.w1.data);
  CHECK(loaded.model.w_out.data == trained.model.w_out.data);
  CHECK(loaded.model.bias == trained.model.bias);
  CHECK(loaded.loss_history == trained.loss_history);
  CHECK(loaded.adjacency_fingerprint == trained.adjacency_fingerprint);
  CHECK(predict(loaded, adj, x) == predict(trained, adj, x));
  std::filesystem::remove_all(dir);
}

TEST_CASE("loss history csv shape") {
  TrainedModel trained;
  trained.loss_history = {4.0, 2.0, 1.0};
  std::ostringstream out;
  write_loss_history_csv(trained, out);
  CHECK(out.str() == "epoch,loss\n0,4\n1,2\n2,1\n");
}

}  // TEST_SUITE
