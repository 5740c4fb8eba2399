#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "struggle/learn.hpp"
#include "struggle/synth.hpp"

using namespace struggle;

namespace {

std::vector<Label> labels(std::size_t pos, std::size_t neg) {
  std::vector<Label> v(pos, Label::Struggle);
  v.insert(v.end(), neg, Label::NonStruggle);
  return v;
}

std::vector<double> as_y(const std::vector<Label>& l) {
  std::vector<double> y;
  for (auto x : l) y.push_back(x == Label::Struggle ? 1.0 : 0.0);
  return y;
}

learn::Design random_design(std::mt19937_64& g, std::size_t n, std::size_t d) {
  std::normal_distribution<double> nd(0, 1);
  learn::Design x(n, std::vector<double>(d));
  for (auto& r : x)
    for (auto& v : r) v = nd(g);
  return x;
}

}  // namespace

TEST_CASE("zero rule") {
  auto l = labels(299, 824);
  auto m = learn::train_zero_rule(l);
  CHECK(m.majority == Label::NonStruggle);
  CHECK(learn::predict(m, std::vector<double>{}).label == Label::NonStruggle);
  CHECK(learn::train_zero_rule(labels(3, 0)).majority == Label::Struggle);
  CHECK(learn::train_zero_rule(labels(1, 1)).majority == Label::NonStruggle);
  CHECK_THROWS_AS(learn::train_zero_rule(std::vector<Label>{}), DataError);

  std::vector<Label> pred(l.size(), Label::NonStruggle);
  auto mt = learn::metrics(pred, l);
  CHECK(mt.accuracy == doctest::Approx(0.7337).epsilon(5e-5 / 0.7337));
  CHECK(*mt.pos_recall == 0);
  CHECK(*mt.neg_recall == 1);
  CHECK_FALSE(mt.pos_precision.has_value());
}

TEST_CASE("metrics") {
  auto actual = labels(3, 1);
  auto perfect = learn::metrics(actual, actual);
  CHECK(perfect.accuracy == 1);
  CHECK(*perfect.pos_precision == 1);
  CHECK(*perfect.pos_recall == 1);
  CHECK(*perfect.neg_precision == 1);
  CHECK(*perfect.neg_recall == 1);

  std::vector<Label> all_pos(4, Label::Struggle);
  auto m = learn::metrics(all_pos, actual);
  CHECK(m.accuracy == 0.75);
  CHECK(*m.pos_precision == 0.75);
  CHECK(*m.pos_recall == 1.0);
  CHECK(*m.neg_recall == 0.0);
  CHECK_FALSE(m.neg_precision.has_value());

  std::mt19937_64 g(2);
  std::bernoulli_distribution b(0.4);
  for (int i = 0; i < 20; ++i) {
    std::vector<Label> p, a;
    for (int j = 0; j < 50; ++j) {
      p.push_back(b(g) ? Label::Struggle : Label::NonStruggle);
      a.push_back(b(g) ? Label::Struggle : Label::NonStruggle);
    }
    auto r = learn::metrics(p, a);
    double npos = r.tp + r.fn, nneg = r.tn + r.fp;
    if (r.pos_recall) CHECK(*r.pos_recall * npos == doctest::Approx(double(r.tp)));
    if (r.pos_recall && r.neg_recall)
      CHECK(r.accuracy == doctest::Approx((*r.pos_recall * npos + *r.neg_recall * nneg) / 50));
  }
}

TEST_CASE("prediction threshold") {
  learn::ClassifierModel m;
  m.weights = {0, 0};
  auto p = learn::predict(m, std::vector<double>{3, -1});
  CHECK(p.prob == 0.5);
  CHECK(p.label == Label::NonStruggle);
  m.weights = {10, 0};
  CHECK(learn::predict(m, std::vector<double>{3, -1}).label == Label::Struggle);
  CHECK_THROWS_AS(learn::predict(m, std::vector<double>{1}), DataError);
  double prev = 0;
  for (double z = -20; z <= 20; z += 0.5) {
    CHECK(learn::sigmoid(z) >= prev);
    prev = learn::sigmoid(z);
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd(0, 1);
  auto x = random_design(g, 40, 6);
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) y.push_back(i % 3 == 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(6);
    for (auto& v : w) v = nd(g);
    double b = nd(g), l2 = 0.01;
    auto grad = learn::logistic_gradient(x, y, w, b, l2);
    const double h = 1e-5;
    double num2 = 0, diff2 = 0;
    for (std::size_t j = 0; j <= w.size(); ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < w.size()) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      double n = (learn::logistic_loss(x, y, wp, bp, l2) - learn::logistic_loss(x, y, wm, bm, l2)) /
                 (2 * h);
      num2 += n * n;
      diff2 += (n - grad[j]) * (n - grad[j]);
    }
    CHECK(std::sqrt(diff2 / num2) < 1e-5);
  }
}

TEST_CASE("training") {
  learn::Design sep = {{1.0, 0.0}, {-1.0, 0.0}};
  std::vector<Label> sl = {Label::Struggle, Label::NonStruggle};
  std::vector<double> trace;
  auto m = learn::train_logistic(sep, sl, {}, &trace);
  for (std::size_t i = 0; i < sep.size(); ++i) CHECK(learn::predict(m, sep[i]).label == sl[i]);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);

  CHECK_THROWS_AS(learn::train_logistic(sep, labels(2, 0)), DataError);

  std::mt19937_64 g(4);
  auto x = random_design(g, 120, 5);
  std::vector<Label> l;
  for (auto& r : x) l.push_back(r[0] + 0.5 * r[1] > 0.2 ? Label::Struggle : Label::NonStruggle);
  trace.clear();
  auto a = learn::train_logistic(x, l, {}, &trace);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
  auto b = learn::train_logistic(x, l);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("random labels give chance accuracy") {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 g(seed);
    std::bernoulli_distribution coin(0.5);
    auto xtr = random_design(g, 200, 5), xte = random_design(g, 200, 5);
    std::vector<Label> ytr, yte;
    for (int i = 0; i < 200; ++i) ytr.push_back(coin(g) ? Label::Struggle : Label::NonStruggle);
    for (int i = 0; i < 200; ++i) yte.push_back(coin(g) ? Label::Struggle : Label::NonStruggle);
    learn::LogisticHyper h;
    h.epochs = 300;
    auto m = learn::train_logistic(xtr, ytr, h);
    std::vector<Label> pred;
    for (auto& r : xte) pred.push_back(learn::predict(m, r).label);
    double acc = learn::metrics(pred, yte).accuracy;
    CHECK(acc > 0.35);
    CHECK(acc < 0.65);
    total += acc;
  }
  CHECK(std::abs(total / 50 - 0.5) < 0.1);
}

TEST_CASE("model round trip") {
  learn::ClassifierModel m;
  m.topics = {"Beauty", "Health"};
  m.weights.assign(feature_count() + 2, 0.25);
  m.weights[0] = -1.0 / 3;
  m.weights[1] = 2e-20;
  m.bias = 0.7;
  std::stringstream buf;
  learn::write_model(buf, m);
  auto back = learn::read_model(buf);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.topics == m.topics);
  CHECK(back.kind == m.kind);
}

TEST_CASE("encoder") {
  learn::Encoder e({"A", "B"});
  CHECK(e.dimension() == feature_count() + 2);
  FeatureVector fv;
  fv.values[0] = 0.5;
  fv.topic = "B";
  auto v = e.encode(fv);
  CHECK(v[0] == 0.5);
  CHECK(v[feature_count()] == 0);
  CHECK(v[feature_count() + 1] == 1);
  fv.topic = "C";
  v = e.encode(fv);
  CHECK(v[feature_count()] + v[feature_count() + 1] == 0);
}

TEST_CASE("stratified folds") {
  auto l = labels(2, 2);
  auto f = learn::stratified_folds(l, 2, 1);
  REQUIRE(f.size() == 4);
  for (int k = 0; k < 2; ++k) {
    int pos = 0, neg = 0;
    for (std::size_t i = 0; i < 4; ++i)
      if (f[i] == k) (l[i] == Label::Struggle ? pos : neg)++;
    CHECK(pos == 1);
    CHECK(neg == 1);
  }
  CHECK_THROWS_AS(learn::stratified_folds(labels(1, 5), 2, 1), DataError);

  auto big = labels(37, 91);
  auto a = learn::stratified_folds(big, 10, 9);
  CHECK(a == learn::stratified_folds(big, 10, 9));
  std::vector<int> sizes(10);
  for (int x : a) {
    REQUIRE(x >= 0);
    REQUIRE(x < 10);
    ++sizes[x];
  }
  for (int s : sizes) CHECK(std::abs(s - 12.8) < 1.5);
}

TEST_CASE("k-fold evaluation") {
  synth::FeatureSimConfig sc;
  sc.n_sessions = 300;
  sc.paratelic_shift = {0.4, 0.4, 0, 0, 0, 0, 0};
  auto rows = synth::generate_feature_rows(sc);
  learn::EvalConfig cfg;
  cfg.k = 5;
  cfg.hyper.epochs = 200;
  for (auto mode : {learn::FmMode::Off, learn::FmMode::Fmns, learn::FmMode::Fm}) {
    cfg.mode = mode;
    auto a = learn::kfold_eval(rows, cfg);
    auto b = learn::kfold_eval(rows, cfg);
    REQUIRE(a.folds.size() == 5);
    std::size_t covered = 0;
    double acc = 0;
    for (std::size_t i = 0; i < a.folds.size(); ++i) {
      CHECK(a.folds[i].train_size + a.folds[i].test_size == rows.size());
      covered += a.folds[i].test_size;
      acc += a.folds[i].metrics.accuracy;
      CHECK(a.folds[i].metrics.accuracy == b.folds[i].metrics.accuracy);
      if (mode == learn::FmMode::Off) CHECK(a.folds[i].modulated_groups.empty());
      if (mode == learn::FmMode::Fmns) CHECK(a.folds[i].modulated_groups.size() == 7);
    }
    CHECK(covered == rows.size());
    CHECK(a.aggregate.accuracy == doctest::Approx(acc / 5));
    CHECK(learn::fold_accuracy(a).size() == 5);
  }
  cfg.mode = learn::FmMode::Off;
  cfg.model = learn::ModelKind::ZeroRule;
  auto z = learn::kfold_eval(rows, cfg);
  CHECK(*z.aggregate.pos_recall == 0);

  cfg.k = 1;
  CHECK_THROWS(learn::kfold_eval(rows, cfg));
}

TEST_CASE("mode names") {
  for (auto m : {learn::FmMode::Off, learn::FmMode::Fmns, learn::FmMode::Fm})
    CHECK(learn::parse_fm_mode(learn::to_string(m)) == m);
  CHECK(learn::parse_fit_scope("global") == learn::FitScope::Global);
  CHECK_THROWS(learn::parse_fm_mode("both"));
}
