#include "cl4srec/evaluator.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cl4srec {

std::string to_string(Phase phase) { return phase == Phase::Valid ? "valid" : "test"; }

std::vector<ItemId> history(const UserSplit& user, Phase phase) {
  std::vector<ItemId> h = user.train;
  if (phase == Phase::Test) h.push_back(user.valid_target);
  return h;
}

ItemId target(const UserSplit& user, Phase phase) {
  return phase == Phase::Valid ? user.valid_target : user.test_target;
}

EncoderScorer::EncoderScorer(const EncoderParams<float>& params, const EncoderHyper& hyper)
    : params_(params), hyper_(hyper) {}

RowVec<float> EncoderScorer::representation(std::span<const ItemId> items) const {
  const auto window = make_window(items, static_cast<std::size_t>(hyper_.max_len));
  return forward(window, params_, hyper_, Mode::Eval, nullptr, false).representation();
}

void EncoderScorer::score(const UserSplit& user, Phase phase, std::span<double> out) const {
  const auto items = history(user, phase);
  const RowVec<float> s = representation(items);
  const auto n = static_cast<Eigen::Index>(hyper_.num_items);
  if (out.size() != static_cast<std::size_t>(n) + 1) throw Error("scorer: output size mismatch");
  const Eigen::Matrix<float, Eigen::Dynamic, 1> scores = params_.item_emb.middleRows(1, n) * s.transpose();
  out[0] = 0.0;
  for (Eigen::Index v = 0; v < n; ++v) out[static_cast<std::size_t>(v) + 1] = scores(v);
}

std::size_t rank_target(std::span<const double> scores, ItemId target, std::span<const ItemId> seen) {
  if (target == kPaddingId || target >= scores.size()) throw Error("rank_target: target not in catalog");
  std::vector<char> skip(scores.size(), 0);
  for (auto v : seen) {
    if (v < skip.size()) skip[v] = 1;
  }
  skip[target] = 1;
  const double ts = scores[target];
  std::size_t rank = 1;
  for (std::size_t v = 1; v < scores.size(); ++v) {
    if (!skip[v] && scores[v] >= ts) ++rank;
  }
  return rank;
}

double hr_at_k(std::size_t rank, std::size_t k) { return rank <= k ? 1.0 : 0.0; }

double ndcg_at_k(std::size_t rank, std::size_t k) {
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

EvalReport evaluate(const Scorer& scorer, const SplitDataset& split, Phase phase, const EvalOptions& options) {
  EvalReport r;
  r.ks = options.ks;
  std::sort(r.ks.begin(), r.ks.end());
  r.phase = phase;
  for (auto k : r.ks) r.hr[k] = r.ndcg[k] = 0.0;
  std::vector<double> scores(split.catalog_size + 1);
  for (const auto& u : split.users) {
    scorer.score(u, phase, scores);
    const auto seen = options.filter_seen ? history(u, phase) : std::vector<ItemId>{};
    const auto rank = rank_target(scores, target(u, phase), seen);
    r.ranks.emplace_back(u.user, rank);
    for (auto k : r.ks) {
      r.hr[k] += hr_at_k(rank, k);
      r.ndcg[k] += ndcg_at_k(rank, k);
    }
  }
  r.users = split.users.size();
  if (r.users) {
    for (auto k : r.ks) {
      r.hr[k] /= static_cast<double>(r.users);
      r.ndcg[k] /= static_cast<double>(r.users);
    }
  }
  return r;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["phase"] = to_string(phase);
  j["users"] = users;
  j["fingerprint"] = fingerprint;
  for (auto k : ks) j["HR@" + std::to_string(k)] = hr.at(k);
  for (auto k : ks) j["NDCG@" + std::to_string(k)] = ndcg.at(k);
  auto& rk = j["ranks"] = nlohmann::ordered_json::array();
  for (const auto& [u, rank] : ranks) rk.push_back({u, rank});
  return j.dump(1);
}

std::string EvalReport::csv_header() const {
  std::string s;
  for (auto k : ks) s += (s.empty() ? "" : ",") + std::string("HR@") + std::to_string(k);
  for (auto k : ks) s += ",NDCG@" + std::to_string(k);
  return s;
}

std::string EvalReport::csv_row() const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  bool first = true;
  for (auto k : ks) {
    os << (first ? "" : ",") << hr.at(k);
    first = false;
  }
  for (auto k : ks) os << ',' << ndcg.at(k);
  return os.str();
}

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw Error("cosine: width mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += double(u[i]) * v[i];
    nu += double(u[i]) * u[i];
    nv += double(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return std::nan("");
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

std::size_t SimilarityReport::bin_of(double c) {
  const auto b = static_cast<long>(std::floor((c + 1.0) / kBinWidth + 1e-9));
  return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(kBins) - 1));
}

std::string SimilarityReport::to_csv() const {
  std::ostringstream os;
  os << "bin_lower,bin_upper,count\n";
  os.precision(2);
  os << std::fixed;
  for (std::size_t b = 0; b < kBins; ++b) {
    os << bin_lower(b) << ',' << bin_lower(b) + kBinWidth << ',' << bins[b] << '\n';
  }
  os.precision(6);
  os << "# pairs," << pairs << "\n# skipped," << skipped << "\n# mean,";
  if (mean) {
    os << *mean;
  } else {
    os << "undefined";
  }
  os << '\n';
  return os.str();
}

SimilarityReport cosine_similarity_report(const std::map<UserId, RowVec<float>>& reprs,
                                          std::span<const std::pair<UserId, UserId>> pairs) {
  SimilarityReport r;
  double sum = 0;
  for (const auto& [a, b] : pairs) {
    auto ia = reprs.find(a), ib = reprs.find(b);
    if (ia == reprs.end() || ib == reprs.end()) {
      ++r.skipped;
      continue;
    }
    const double c = cosine(std::span<const float>(ia->second.data(), ia->second.size()),
                            std::span<const float>(ib->second.data(), ib->second.size()));
    if (std::isnan(c)) {
      ++r.skipped;
      continue;
    }
    ++r.bins[SimilarityReport::bin_of(c)];
    ++r.pairs;
    sum += c;
  }
  if (r.pairs) r.mean = sum / static_cast<double>(r.pairs);
  return r;
}

}  // namespace cl4srec
