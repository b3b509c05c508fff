// Copyright 2026 The ModelForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modelforge/models/artifact.h"

#include <cstring>

#include "modelforge/common/error.h"

namespace modelforge::models {
namespace {

constexpr char kMagic[4] = {'M', 'F', 'M', 'D'};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

[[noreturn]] void parse_error(const std::string& msg) {
  fail(ErrorCode::kIntegrity, "artifact-parse", "malformed model artifact: " + msg);
}

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) {
    if (b_.size() - pos_ < n) parse_error("truncated");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

class Payload {
 public:
  void add(double v) { values_.push_back(v); }
  void add(const std::vector<double>& v) { values_.insert(values_.end(), v.begin(), v.end()); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

class PayloadReader {
 public:
  explicit PayloadReader(std::vector<double> v) : v_(std::move(v)) {}
  double next() {
    if (pos_ >= v_.size()) parse_error("payload shorter than header declares");
    return v_[pos_++];
  }
  std::vector<double> take(std::size_t n) {
    if (v_.size() - pos_ < n) parse_error("payload shorter than header declares");
    std::vector<double> out(v_.begin() + static_cast<long>(pos_), v_.begin() + static_cast<long>(pos_ + n));
    pos_ += n;
    return out;
  }
  void finish() const {
    if (pos_ != v_.size()) parse_error("payload longer than header declares");
  }

 private:
  std::vector<double> v_;
  std::size_t pos_ = 0;
};

json encode_body(const Model& m, Payload& p) {
  json h;
  switch (m.family) {
    case Family::kMajority: {
      h["label"] = m.majority().label;
      h["counts"] = m.majority().counts;
      break;
    }
    case Family::kNaiveBayes: {
      const auto& nb = m.nb();
      h["classes"] = nb.classes;
      h["vocabulary"] = nb.vocabulary;
      p.add(nb.alpha);
      p.add(nb.log_priors);
      p.add(nb.unseen_log_likelihoods);
      for (const auto& row : nb.token_log_likelihoods) p.add(row);
      break;
    }
    case Family::kLogReg: {
      const auto& lr = m.logreg();
      h["feature_names"] = lr.feature_names;
      h["dropped"] = lr.dropped;
      p.add(lr.means);
      p.add(lr.stds);
      p.add(lr.weights);
      p.add(lr.bias);
      break;
    }
    case Family::kTfidf: {
      const auto& ix = m.tfidf();
      h["vocabulary"] = ix.vocabulary;
      h["docs"] = json::array();
      p.add(ix.idf);
      for (const auto& d : ix.docs) {
        h["docs"].push_back({{"id", d.id}, {"timestamp", d.timestamp}, {"status", d.status}, {"terms", d.terms}});
        p.add(d.norm);
        p.add(d.weights);
      }
      break;
    }
  }
  return h;
}

void decode_body(Model& m, const json& h, PayloadReader& p) {
  switch (m.family) {
    case Family::kMajority: {
      MajorityModel mm;
      mm.label = h.at("label").get<std::string>();
      mm.counts = h.at("counts").get<std::map<std::string, std::size_t>>();
      m.body = std::move(mm);
      break;
    }
    case Family::kNaiveBayes: {
      NBModel nb;
      nb.classes = h.at("classes").get<std::vector<std::string>>();
      nb.vocabulary = h.at("vocabulary").get<std::vector<std::string>>();
      nb.alpha = p.next();
      nb.log_priors = p.take(nb.classes.size());
      nb.unseen_log_likelihoods = p.take(nb.classes.size());
      for (std::size_t c = 0; c < nb.classes.size(); ++c) nb.token_log_likelihoods.push_back(p.take(nb.vocabulary.size()));
      m.body = std::move(nb);
      break;
    }
    case Family::kLogReg: {
      LRModel lr;
      lr.feature_names = h.at("feature_names").get<std::vector<std::string>>();
      lr.dropped = h.at("dropped").get<std::vector<std::string>>();
      const auto d = lr.feature_names.size();
      lr.means = p.take(d);
      lr.stds = p.take(d);
      lr.weights = p.take(d);
      lr.bias = p.next();
      m.body = std::move(lr);
      break;
    }
    case Family::kTfidf: {
      TfidfIndex ix;
      ix.vocabulary = h.at("vocabulary").get<std::vector<std::string>>();
      ix.idf = p.take(ix.vocabulary.size());
      for (const auto& dj : h.at("docs")) {
        TfidfIndex::Doc d;
        d.id = dj.at("id").get<std::string>();
        d.timestamp = dj.at("timestamp").get<Timestamp>();
        d.status = dj.at("status").get<std::string>();
        d.terms = dj.at("terms").get<std::vector<std::uint32_t>>();
        for (auto t : d.terms) {
          if (t >= ix.vocabulary.size()) parse_error("term index out of range");
        }
        d.norm = p.next();
        d.weights = p.take(d.terms.size());
        ix.docs.push_back(std::move(d));
      }
      m.body = std::move(ix);
      break;
    }
  }
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kMajority: return "majority";
    case Family::kNaiveBayes: return "nb-multinomial";
    case Family::kLogReg: return "logreg-binary";
    case Family::kTfidf: return "tfidf-knn";
  }
  return "majority";
}

Family family_from(std::string_view name) {
  for (auto f : {Family::kMajority, Family::kNaiveBayes, Family::kLogReg, Family::kTfidf}) {
    if (family_name(f) == name) return f;
  }
  fail(ErrorCode::kValidation, "unknown-family", "unknown model family '" + std::string(name) + "'");
}

std::string serialize_model(const Model& model) {
  Payload payload;
  json header = {{"family", family_name(model.family)}, {"binding", model.binding}};
  header["model"] = encode_body(model, payload);
  const std::string h = header.dump();
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kArtifactFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  put_le<std::uint64_t>(out, payload.values().size());
  for (double v : payload.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le<std::uint64_t>(out, bits);
  }
  return out;
}

Model deserialize_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string_view(kMagic, 4)) parse_error("bad magic");
  const auto version = r.le<std::uint32_t>();
  if (version != kArtifactFormatVersion) {
    fail(ErrorCode::kIntegrity, "artifact-version",
         "unsupported model artifact format version " + std::to_string(version) + " (supported: " +
             std::to_string(kArtifactFormatVersion) + ")",
         {{{"version", version}}});
  }
  const auto header_len = r.le<std::uint32_t>();
  json header;
  try {
    header = json::parse(r.bytes(header_len));
  } catch (const json::exception& e) {
    parse_error(std::string("header: ") + e.what());
  }
  const auto count = r.le<std::uint64_t>();
  if (count > (bytes.size() / 8)) parse_error("truncated");
  std::vector<double> values;
  values.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto bits = r.le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    values.push_back(v);
  }
  if (!r.at_end()) parse_error("trailing bytes");
  Model m;
  try {
    m.family = family_from(header.at("family").get<std::string>());
    m.binding = header.at("binding");
    PayloadReader p(std::move(values));
    decode_body(m, header.at("model"), p);
    p.finish();
  } catch (const json::exception& e) {
    parse_error(std::string("header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIntegrity) throw;
    parse_error(e.what());
  }
  return m;
}

}  // namespace modelforge::models
