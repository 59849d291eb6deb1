#include "cli/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <string_view>

namespace locreward::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

// Strict view of a JSON object: every key must be in `allowed`.
class Fields {
 public:
  Fields(const Json& j, std::string where, std::initializer_list<std::string_view> allowed)
      : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected a JSON object");
    for (const auto& [key, value] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(where_, "unknown field '" + key + "'");
      }
    }
  }

  const std::string& where() const { return where_; }
  std::string at(std::string_view key) const { return where_ + "." + std::string(key); }

  const Json* find(std::string_view key) const {
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& required(std::string_view key) const {
    const Json* v = find(key);
    if (!v) fail(where_, "missing required field '" + std::string(key) + "'");
    return *v;
  }

 private:
  const Json& j_;
  std::string where_;
};

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

std::size_t as_count(const Json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

BBox as_box(const Json& v, const std::string& where) {
  const auto q = as_numbers(v, where);
  if (q.size() != 4) fail(where, "expected [x1, y1, x2, y2]");
  return {q[0], q[1], q[2], q[3]};
}

std::vector<BBox> as_boxes(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of boxes");
  std::vector<BBox> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_box(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Label as_label(const Json& v, const std::string& where) {
  if (!v.is_number_unsigned() || v.get<unsigned>() > 1) fail(where, "expected label 0 or 1");
  return v.get<unsigned>() == 1 ? Label::Abnormal : Label::Normal;
}

RewardScheme as_scheme(const Json& v, const std::string& where) {
  const auto name = as_string(v, where);
  const auto s = parse_scheme(name);
  if (!s) fail(where, "unknown reward scheme '" + name + "'");
  return *s;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

Json parse_text(const std::string& text, const std::string& where_file) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(where_file + ":" + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)),
         "invalid JSON");
  }
}

Sample parse_sample(const Json& j, const std::string& where) {
  const Fields f(j, where, {"id", "label", "gt_boxes", "image_width", "image_height"});
  Sample s;
  s.id = as_string(f.required("id"), f.at("id"));
  s.label = as_label(f.required("label"), f.at("label"));
  s.gt_boxes = as_boxes(f.required("gt_boxes"), f.at("gt_boxes"));
  if (const Json* w = f.find("image_width")) s.image_width = as_number(*w, f.at("image_width"));
  if (const Json* h = f.find("image_height")) s.image_height = as_number(*h, f.at("image_height"));
  try {
    validate_sample(s);
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return s;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_text(text, path.string());
}

SampleTable load_samples(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  const std::string file = path.string();
  const Fields top(doc, file, {"samples"});
  const Json& arr = top.required("samples");
  if (!arr.is_array()) fail(top.at("samples"), "expected an array");
  SampleTable table;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Sample s = parse_sample(arr[i], file + ": samples[" + std::to_string(i) + "]");
    const std::string id = s.id;
    if (!table.emplace(id, std::move(s)).second) {
      fail(file + ": samples[" + std::to_string(i) + "]", "duplicate sample id '" + id + "'");
    }
  }
  return table;
}

ResponseRecord parse_response_line(const std::string& line, const std::string& where) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    fail(where, "invalid JSON");
  }
  const Fields f(j, where,
                 {"sample_id", "response_text", "token_logprobs_policy", "token_logprobs_ref"});
  ResponseRecord r;
  r.sample_id = as_string(f.required("sample_id"), f.at("sample_id"));
  r.text = as_string(f.required("response_text"), f.at("response_text"));
  if (const Json* p = f.find("token_logprobs_policy")) {
    r.token_logprobs_policy = as_numbers(*p, f.at("token_logprobs_policy"));
  }
  if (const Json* p = f.find("token_logprobs_ref")) {
    r.token_logprobs_ref = as_numbers(*p, f.at("token_logprobs_ref"));
  }
  try {
    validate_record(r);
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return r;
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  const std::string file = path.string();
  const Fields top(doc, file,
                   {"grid", "candidate_boxes", "max_boxes", "count_logits", "evidence_coupling", "group_size", "epochs",
                    "learning_rate", "reward", "samples"});
  sim::Scenario sc;

  const Fields grid(top.required("grid"), top.at("grid"), {"width", "height"});
  sc.grid_width = as_number(grid.required("width"), grid.at("width"));
  sc.grid_height = as_number(grid.required("height"), grid.at("height"));
  sc.candidate_boxes = as_boxes(top.required("candidate_boxes"), top.at("candidate_boxes"));
  sc.max_boxes = as_count(top.required("max_boxes"), top.at("max_boxes"));
  sim::ReferenceShape shape;
  if (const Json* c = top.find("count_logits")) shape.count_logits = as_numbers(*c, top.at("count_logits"));
  if (const Json* c = top.find("evidence_coupling")) {
    shape.evidence_coupling = as_number(*c, top.at("evidence_coupling"));
  }
  if (const Json* g = top.find("group_size")) sc.group_size = as_count(*g, top.at("group_size"));
  sc.epochs = as_count(top.required("epochs"), top.at("epochs"));
  sc.learning_rate = as_number(top.required("learning_rate"), top.at("learning_rate"));

  if (const Json* r = top.find("reward")) {
    const Fields rf(*r, top.at("reward"),
                    {"alpha", "beta", "scheme", "std_eps", "random_sigma", "seed"});
    if (const Json* v = rf.find("alpha")) sc.cfg.alpha = as_number(*v, rf.at("alpha"));
    if (const Json* v = rf.find("beta")) sc.cfg.beta = as_number(*v, rf.at("beta"));
    if (const Json* v = rf.find("scheme")) sc.cfg.scheme = as_scheme(*v, rf.at("scheme"));
    if (const Json* v = rf.find("std_eps")) sc.cfg.std_eps = as_number(*v, rf.at("std_eps"));
    if (const Json* v = rf.find("random_sigma")) sc.cfg.random_sigma = as_number(*v, rf.at("random_sigma"));
    if (const Json* v = rf.find("seed")) {
      if (!v->is_number_unsigned()) fail(rf.at("seed"), "expected a non-negative integer");
      sc.cfg.seed = v->get<std::uint64_t>();
    }
  }

  for (const BBox& b : sc.candidate_boxes) {
    if (!b.valid()) fail(top.at("candidate_boxes"), "degenerate candidate box");
  }
  try {
    sc.templates = sim::enumerate_templates(sc.candidate_boxes, sc.max_boxes);
  } catch (const Error& e) {
    fail(file, e.what());
  }

  const Json& arr = top.required("samples");
  if (!arr.is_array()) fail(top.at("samples"), "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = file + ": samples[" + std::to_string(i) + "]";
    const Fields f(arr[i], where,
                   {"id", "label", "gt_boxes", "answer_logits", "box_logits", "reference_logits"});
    Json plain = Json::object();
    plain["id"] = f.required("id");
    plain["label"] = f.required("label");
    plain["gt_boxes"] = f.required("gt_boxes");
    plain["image_width"] = sc.grid_width;
    plain["image_height"] = sc.grid_height;
    Sample s = parse_sample(plain, where);
    s.image_width.reset();
    s.image_height.reset();

    std::vector<double> logits;
    if (const Json* explicit_logits = f.find("reference_logits")) {
      if (f.find("answer_logits") || f.find("box_logits")) {
        fail(where, "give either reference_logits or answer_logits/box_logits, not both");
      }
      logits = as_numbers(*explicit_logits, f.at("reference_logits"));
      if (logits.size() != sc.templates.size()) {
        fail(f.at("reference_logits"), "expected " + std::to_string(sc.templates.size()) +
                                           " logits (one per template)");
      }
    } else {
      sim::ReferencePrior prior;
      if (const Json* a = f.find("answer_logits")) {
        const auto v = as_numbers(*a, f.at("answer_logits"));
        if (v.size() != 2) fail(f.at("answer_logits"), "expected [normal, abnormal]");
        prior.answer_logits[0] = v[0];
        prior.answer_logits[1] = v[1];
      }
      prior.box_logits.assign(sc.candidate_boxes.size(), 0.0);
      if (const Json* b = f.find("box_logits")) {
        prior.box_logits = as_numbers(*b, f.at("box_logits"));
        if (prior.box_logits.size() != sc.candidate_boxes.size()) {
          fail(f.at("box_logits"), "expected one logit per candidate box");
        }
      }
      logits = sim::reference_logits(prior, shape, s, sc.candidate_boxes, sc.templates);
    }
    sc.samples.push_back(std::move(s));
    sc.reference_logits.push_back(std::move(logits));
  }

  try {
    sc.validate();
  } catch (const Error& e) {
    fail(file, e.what());
  }
  return sc;
}

Json box_to_json(const BBox& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

Json report_to_json(const analytics::VarianceReport& r) {
  Json j = Json::object();
  j["scheme"] = r.scheme ? Json(std::string(to_string(*r.scheme))) : Json(nullptr);
  j["groups_total"] = r.groups_total;
  j["groups_zero_variance"] = r.groups_zero_variance;
  j["zero_variance_pct"] = r.zero_variance_pct;
  j["per_group_variance"] = r.per_group_variance;
  return j;
}

Json epoch_to_json(const sim::EpochStats& e) {
  Json j = Json::object();
  j["epoch"] = e.epoch;
  j["mean_reward"] = e.mean_reward;
  j["zero_variance_fraction"] = e.zero_variance_fraction;
  j["accuracy"] = e.accuracy;
  j["greedy_accuracy"] = e.greedy_accuracy;
  j["mean_kl"] = e.mean_kl;
  return j;
}

Json scored_line(std::size_t group_id, const std::string& sample_id, std::size_t index,
                 RewardScheme scheme, const response::ParsedResponse& parsed,
                 const rewards::RewardBreakdown& b, double advantage, bool zero_variance,
                 const grpo::GroupSignal* signal) {
  Json j = Json::object();
  j["group_id"] = group_id;
  j["sample_id"] = sample_id;
  j["index"] = index;
  j["scheme"] = std::string(to_string(scheme));
  j["format_ok"] = parsed.format_ok;
  j["pred_label"] = parsed.label ? Json(static_cast<int>(*parsed.label)) : Json(nullptr);
  j["r_cls"] = b.r_cls;
  j["r_count_or_focus"] = b.r_count_or_focus;
  j["r_giou_mean"] = b.r_giou_mean;
  j["r_loc"] = b.r_loc;
  j["r_format"] = b.r_format;
  j["r_random"] = b.r_random;
  j["total"] = b.total;
  j["m"] = b.m;
  j["n"] = b.n;
  Json pairs = Json::array();
  for (const auto& [i, k] : b.matched_pairs.pairs) pairs.push_back(Json::array({i, k}));
  j["matched_pairs"] = std::move(pairs);
  j["match_cost"] = b.matched_pairs.total_cost;
  j["advantage"] = advantage;
  j["zero_variance"] = zero_variance;
  if (signal) {
    j["kl_mean"] = signal->kl_per_response.at(index);
    j["loss_rew"] = signal->loss_rew;
    j["loss_reg"] = signal->loss_reg;
    j["loss_total"] = signal->loss_total;
  }
  return j;
}

}  // namespace locreward::cli
