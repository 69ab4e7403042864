#include "vsrl/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "vsrl/errors.hpp"
#include "vsrl/textio.hpp"

namespace vsrl {

namespace {

void write_values(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_real(v[i]) << '\n';
}

void write_network(std::ostream& out, const std::string& name,
                   const MlpSpec& spec, const ParamVector& params) {
  out << "network " << name << '\n' << "dims";
  for (int d : spec.layer_dims()) out << ' ' << d;
  out << '\n' << "values " << params.values.size() << '\n';
  write_values(out, params.values);
}

void write_adam(std::ostream& out, const std::string& name,
                const AdamState& s) {
  out << "adam " << name << ' ' << s.step_count << ' '
      << format_real(s.learning_rate) << ' ' << s.first_moment.size() << '\n';
  write_values(out, s.first_moment);
  write_values(out, s.second_moment);
}

void write_text(std::ostream& out, const std::string& name,
                const std::string& body) {
  std::vector<std::string> lines;
  std::istringstream in(body);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  out << "text " << name << ' ' << lines.size() << '\n';
  for (const auto& line : lines) out << line << '\n';
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw IoError("checkpoint is truncated");
    return l;
  }

  // Reads a line and checks its first token.
  std::istringstream expect(const std::string& tag) {
    std::istringstream fields(line());
    std::string word;
    fields >> word;
    if (word != tag) {
      throw IoError("checkpoint: expected '" + tag + "', found '" + word + "'");
    }
    return fields;
  }

  Eigen::VectorXd values(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string l = line();
      try {
        std::size_t used = 0;
        v[i] = std::stod(l, &used);
      } catch (const std::logic_error&) {
        throw IoError("checkpoint: malformed real '" + l + "'");
      }
    }
    return v;
  }

  std::pair<MlpSpec, ParamVector> network(const std::string& name) {
    std::string got;
    expect("network") >> got;
    if (got != name) {
      throw IoError("checkpoint: expected network '" + name + "', found '" +
                    got + "'");
    }
    auto dims_line = expect("dims");
    std::vector<int> dims;
    for (int d; dims_line >> d;) dims.push_back(d);
    if (dims.size() < 2) throw IoError("checkpoint: network needs >= 2 dims");
    MlpSpec spec;
    spec.input_dim = dims.front();
    spec.output_dim = dims.back();
    spec.hidden_dims.assign(dims.begin() + 1, dims.end() - 1);
    spec.validate();
    Eigen::Index n = 0;
    expect("values") >> n;
    if (static_cast<std::size_t>(n) != spec.parameter_count()) {
      throw IoError("checkpoint: parameter count does not match dims");
    }
    return {spec, ParamVector{values(n)}};
  }

  AdamState adam(const std::string& name) {
    auto fields = expect("adam");
    std::string got;
    AdamState s;
    Eigen::Index n = 0;
    fields >> got >> s.step_count >> s.learning_rate >> n;
    if (!fields || got != name) throw IoError("checkpoint: bad adam record");
    s.first_moment = values(n);
    s.second_moment = values(n);
    return s;
  }

  std::string text(const std::string& name) {
    auto fields = expect("text");
    std::string got;
    int k = 0;
    fields >> got >> k;
    if (!fields || got != name) {
      throw IoError("checkpoint: expected text block '" + name + "'");
    }
    std::string body;
    for (int i = 0; i < k; ++i) body += line() + '\n';
    return body;
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string serialize_checkpoint(const TrainingCheckpoint& c) {
  std::ostringstream out;
  out << kCheckpointHeader << '\n';
  out << "counters " << c.iteration << ' ' << c.env_steps << ' '
      << c.policy_steps << ' ' << c.value_steps << '\n';
  write_network(out, "policy_mean", c.agent.policy.mean_spec,
                c.agent.policy.mean_net);
  out << "vector log_std " << c.agent.policy.log_std.size() << '\n';
  write_values(out, c.agent.policy.log_std);
  write_network(out, "value", c.agent.value_spec, c.agent.value);
  write_adam(out, "policy", c.agent.policy_opt);
  write_adam(out, "value", c.agent.value_opt);
  const Normalizers& n = c.normalizers;
  write_text(out, "normalizers",
             std::string(n.observations_enabled ? "1" : "0") + " " +
                 (n.rewards_enabled ? "1" : "0") + "\n" +
                 n.observation.serialize() + "\n" + n.reward.serialize() + "\n");
  write_text(out, "rng", c.rng_state);
  write_text(out, "venv", c.venv_state);
  out << "end\n";
  return out.str();
}

TrainingCheckpoint deserialize_checkpoint(const std::string& text) {
  Reader r(text);
  const std::string header = r.line();
  if (header != kCheckpointHeader) {
    throw IoError("checkpoint version mismatch: expected '" +
                  std::string(kCheckpointHeader) + "', found '" + header + "'");
  }
  TrainingCheckpoint c;
  auto counters = r.expect("counters");
  counters >> c.iteration >> c.env_steps >> c.policy_steps >> c.value_steps;
  if (!counters) throw IoError("checkpoint: malformed counters");

  auto [policy_spec, policy_params] = r.network("policy_mean");
  c.agent.policy.mean_spec = policy_spec;
  c.agent.policy.mean_net = std::move(policy_params);
  {
    auto fields = r.expect("vector");
    std::string name;
    Eigen::Index n = 0;
    fields >> name >> n;
    if (name != "log_std" || n != policy_spec.output_dim) {
      throw IoError("checkpoint: bad log_std record");
    }
    c.agent.policy.log_std = r.values(n);
  }
  auto [value_spec, value_params] = r.network("value");
  c.agent.value_spec = value_spec;
  c.agent.value = std::move(value_params);
  c.agent.policy_opt = r.adam("policy");
  c.agent.value_opt = r.adam("value");
  if (c.agent.policy_opt.first_moment.size() != c.agent.policy.flat_size() ||
      c.agent.value_opt.first_moment.size() != c.agent.value.values.size()) {
    throw IoError("checkpoint: optimizer state does not match networks");
  }

  {
    std::istringstream body(r.text("normalizers"));
    std::string flags, obs_line, reward_line;
    std::getline(body, flags);
    std::getline(body, obs_line);
    std::getline(body, reward_line);
    if (!body) throw IoError("checkpoint: malformed normalizer block");
    std::istringstream f(flags);
    int obs_on = 0, rew_on = 0;
    f >> obs_on >> rew_on;
    c.normalizers.observations_enabled = obs_on != 0;
    c.normalizers.rewards_enabled = rew_on != 0;
    c.normalizers.observation = RunningMoments::deserialize(obs_line);
    c.normalizers.reward.deserialize(reward_line);
  }
  c.rng_state = r.text("rng");
  c.venv_state = r.text("venv");
  if (r.line() != "end") throw IoError("checkpoint: missing end marker");
  return c;
}

void save_checkpoint(const TrainingCheckpoint& ckpt, const std::string& path) {
  const std::filesystem::path p(path);
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + tmp.string() + "'");
    out << serialize_checkpoint(ckpt);
    if (!out) throw IoError("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw IoError("cannot move checkpoint into '" + path + "'");
}

TrainingCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace vsrl
