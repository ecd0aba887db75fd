#include "posit/cli/commands.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "posit/dyadic.hpp"
#include "posit/hw/verify.hpp"
#include "posit/posit.hpp"
#include "posit/quantizer.hpp"
#include "posit/train/checkpoint.hpp"
#include "posit/train/plan.hpp"
#include "posit/train/trainer.hpp"

namespace posit::cli {

namespace {

namespace fs = std::filesystem;
using train::NamedTensor;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FormatFlags {
  int n = 0;
  int es = 0;
};

PositConfig config_from(const FormatFlags& f) {
  try {
    return make_config(f.n, f.es);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void add_format_flags(CLI::App& cmd, FormatFlags& f) {
  cmd.add_option("--n", f.n, "posit width in bits")->required();
  cmd.add_option("--es", f.es, "exponent field width")->required();
}

// ---------------------------------------------------------------- table

struct TableArgs {
  FormatFlags format;
  std::string style = "csv";
};

std::string fields_cell(const std::optional<PositFields>& f, int which) {
  if (!f) return "x";
  switch (which) {
    case 0: return std::to_string(f->k);
    case 1: return std::to_string(f->e);
    default: return format_fraction(f->f());
  }
}

int cmd_table(const TableArgs& a, std::ostream& out) {
  const PositConfig cfg = config_from(a.format);
  if (cfg.n() > kMaxTableBits) {
    throw UsageError("table too large: n=" + std::to_string(cfg.n()) + " exceeds " + std::to_string(kMaxTableBits));
  }
  const auto rows = enumerate_table(cfg);
  const std::vector<std::string> header{"bits", "regime", "exponent", "mantissa", "value"};
  std::vector<std::vector<std::string>> cells;
  for (const TableRow& r : rows) {
    cells.push_back({r.bits.to_binary(), fields_cell(r.fields, 0), fields_cell(r.fields, 1), fields_cell(r.fields, 2),
                     format_fraction(r.value)});
  }
  if (a.style == "csv") {
    out << "bits,regime,exponent,mantissa,value\n";
    for (const auto& row : cells) out << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ',' << row[4] << '\n';
    return kExitOk;
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool last = c + 1 == row.size();
      out << (c == 0 ? "" : "  ") << std::left << std::setw(last ? 0 : static_cast<int>(width[c])) << row[c];
    }
    out << '\n';
  };
  line(header);
  for (const auto& row : cells) line(row);
  return kExitOk;
}

// ---------------------------------------------------------------- convert

struct ConvertArgs {
  FormatFlags format;
  std::optional<std::string> value;
  std::optional<std::string> bits;
};

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const char* begin = text.data();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw UsageError("not a number: '" + text + "'");
  return v;
}

std::uint32_t parse_hex_bits(const std::string& text, const PositConfig& cfg) {
  std::string_view s = text;
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("not a hexadecimal pattern: '" + text + "'");
  }
  if (v > cfg.mask()) throw UsageError("pattern " + text + " does not fit in " + std::to_string(cfg.n()) + " bits");
  return static_cast<std::uint32_t>(v);
}

std::string hex(std::uint32_t bits, int n) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw((n + 3) / 4) << std::setfill('0') << bits;
  return s.str();
}

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
  const PositConfig cfg = config_from(a.format);
  if (a.value.has_value() == a.bits.has_value()) throw UsageError("give exactly one of --value and --bits");
  PositBits p{0, cfg};
  if (a.value) {
    const double x = parse_double(*a.value);
    if (!std::isfinite(x)) throw UsageError("--value must be finite");
    p = encode_from_real(static_cast<WideReal>(x), cfg);
    out << "input: " << format_real(x) << '\n';
  } else {
    p = make_bits(parse_hex_bits(*a.bits, cfg), cfg);
  }
  out << "format: " << cfg.name() << '\n';
  out << "bits: " << p.to_binary() << '\n';
  out << "hex: " << hex(p.bits, cfg.n()) << '\n';
  const Decoded d = decode_fields(p);
  if (const auto* special = std::get_if<Special>(&d)) {
    out << "value: " << (*special == Special::NaR ? "NaR" : "0") << '\n';
    return kExitOk;
  }
  const auto& f = std::get<PositFields>(d);
  out << "s: " << (f.sign < 0 ? 1 : 0) << '\n'
      << "k: " << f.k << '\n'
      << "e: " << f.e << '\n'
      << "f: " << format_fraction(f.f()) << '\n'
      << "rb: " << f.rb << '\n'
      << "eb: " << f.eb << '\n'
      << "fb: " << f.fb << '\n'
      << "value: " << format_fraction(*decode_to_real(p)) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- quantize, stats

struct QuantizeArgs {
  FormatFlags format;
  bool scale = true;
  bool no_scale = false;
  int sigma = kDefaultSigma;
  std::string in;
  std::string out;
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& err) {
  const PositConfig cfg = config_from(a.format);
  const bool scaling = !a.no_scale;
  const QuantSpec spec{cfg, scaling, a.sigma, false};
  auto tensors = train::read_checkpoint(a.in);
  for (NamedTensor& t : tensors) {
    std::optional<ScaleFactor> sf;
    if (scaling) {
      sf = scale_factor(t.tensor, a.sigma);
      if (sf->degenerate) {
        err << "warning: " << t.name << " has no nonzero finite element; S_f falls back to 2^" << a.sigma << '\n';
      }
    }
    const TensorF q = quantize_tensor(t.tensor, spec, sf);
    err << t.name << ": S_f=" << (sf ? format_real(sf->value()) : std::string("1"));
    if (sf) err << " (2^" << sf->exponent() << ")";
    err << " mean_relative_error=" << format_real(mean_relative_error(t.tensor.data, q.data)) << '\n';
    t.tensor = q;
  }
  train::write_checkpoint(a.out, tensors);
  return kExitOk;
}

struct StatsArgs {
  std::string in;
  std::optional<std::string> name;
  std::optional<std::string> out;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const auto tensors = train::read_checkpoint(a.in);
  std::vector<double> values;
  bool found = false;
  for (const NamedTensor& t : tensors) {
    if (a.name && t.name != *a.name) continue;
    found = true;
    values.insert(values.end(), t.tensor.data.begin(), t.tensor.data.end());
  }
  if (a.name && !found) throw UsageError("no tensor named '" + *a.name + "' in " + a.in);
  const Log2Histogram h = log2_histogram(values);
  if (a.out) {
    std::ofstream file(*a.out, std::ios::binary);
    write_histogram_csv(h, file);
    if (!file) throw std::runtime_error("cannot write " + *a.out);
  } else {
    write_histogram_csv(h, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train, eval

struct TrainArgs {
  std::string plan;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> warmup;
  std::optional<std::string> data_dir;
  std::optional<std::string> metrics;
  std::optional<std::string> scale_log;
  std::optional<std::string> checkpoint;
  bool passthrough = false;
};

train::TrainPlan load_plan_with_overrides(const TrainArgs& a) {
  train::TrainPlan plan;
  try {
    plan = train::load_plan(a.plan);
    if (a.seed) plan.seed = *a.seed;
    if (a.epochs) plan.epochs = *a.epochs;
    if (a.warmup) plan.warmup_epochs = *a.warmup;
    if (a.passthrough) plan.quant = train::QuantMap::passthrough();
    plan.validate();
  } catch (const train::PlanError& e) {
    throw UsageError(e.what());
  }
  if (a.data_dir) {
    const fs::path dir(*a.data_dir);
    for (fs::path* p : {&plan.dataset.train_images, &plan.dataset.train_labels, &plan.dataset.val_images,
                        &plan.dataset.val_labels}) {
      *p = dir / p->filename();
    }
  }
  return plan;
}

template <class Write>
void write_text(const std::string& path, Write&& write) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  write(file);
  if (!file) throw std::runtime_error("cannot write " + path);
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const train::TrainPlan plan = load_plan_with_overrides(a);
  const train::TrainData data = train::load_train_data(plan);
  train::TrainResult r = train::train(plan, data, &err);
  if (a.metrics) {
    write_text(*a.metrics, [&](std::ostream& f) { r.metrics.write_metrics_csv(f); });
  } else {
    r.metrics.write_metrics_csv(out);
  }
  if (a.scale_log) write_text(*a.scale_log, [&](std::ostream& f) { r.metrics.write_scale_csv(f); });
  if (a.checkpoint) {
    auto tensors = r.net.state();
    const auto scales = train::scale_table_tensors(r.net, r.scales);
    tensors.insert(tensors.end(), scales.begin(), scales.end());
    train::write_checkpoint(*a.checkpoint, tensors);
  }
  return kExitOk;
}

int cmd_eval(const TrainArgs& a, std::ostream& out) {
  const train::TrainPlan plan = load_plan_with_overrides(a);
  if (!a.checkpoint) throw UsageError("eval needs --checkpoint");
  const train::TrainData data = train::load_train_data(plan);
  train::Network net = train::build_network(plan);
  const auto tensors = train::read_checkpoint(*a.checkpoint);
  try {
    net.load_state(tensors);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("checkpoint does not match the plan: ") + e.what());
  }
  const train::ScaleTable scales = train::scale_table_from_tensors(net, tensors);
  const double acc = train::evaluate(net, data.val, plan.quant, scales);
  out << "val_acc," << format_real(acc) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- hw-verify

struct VerifyArgs {
  FormatFlags format;
  bool exhaustive = false;
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 1;
};

int cmd_hw_verify(const VerifyArgs& a, std::ostream& out) {
  const PositConfig cfg = config_from(a.format);
  if (a.exhaustive && a.samples) throw UsageError("give at most one of --exhaustive and --samples");
  if (a.exhaustive && cfg.n() > hw::kMaxExhaustiveBits) {
    throw UsageError("exhaustive verification is limited to n <= " + std::to_string(hw::kMaxExhaustiveBits) +
                     "; use --samples K for " + cfg.name());
  }
  hw::VerifyOptions opt;
  opt.exhaustive = a.exhaustive;
  if (a.samples) {
    if (*a.samples == 0) throw UsageError("--samples must be positive");
    opt.samples = *a.samples;
  }
  opt.seed = a.seed;
  const hw::VerifyReport report = hw::verify_datapath(cfg, opt);
  report.write(out);
  return report.pass() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posit number format toolkit: tables, conversion, tensor quantization, training and datapath checks",
               "posit_cli"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "posit_cli 1.0");

  TableArgs table;
  auto* c_table = app.add_subcommand("table", "list every nonnegative pattern with its fields");
  add_format_flags(*c_table, table.format);
  c_table->add_option("--format", table.style, "csv or pretty")->check(CLI::IsMember({"csv", "pretty"}));

  ConvertArgs convert;
  auto* c_convert = app.add_subcommand("convert", "real to pattern or pattern to real, with the field breakdown");
  add_format_flags(*c_convert, convert.format);
  c_convert->add_option("--value", convert.value, "real to encode (rounded toward zero)");
  c_convert->add_option("--bits", convert.bits, "pattern in hexadecimal, e.g. 0x10");

  QuantizeArgs quantize;
  auto* c_quantize = app.add_subcommand("quantize", "quantize every tensor of a checkpoint file");
  add_format_flags(*c_quantize, quantize.format);
  c_quantize->add_flag("--scale", quantize.scale, "apply the per-tensor scale factor (default)");
  c_quantize->add_flag("--no-scale", quantize.no_scale, "quantize without scaling");
  c_quantize->add_option("--sigma", quantize.sigma, "scale-factor offset");
  c_quantize->add_option("--in", quantize.in, "input tensor file")->required();
  c_quantize->add_option("--out", quantize.out, "output tensor file")->required();

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "log2 magnitude histogram of tensors as CSV");
  c_stats->add_option("--in", stats.in, "tensor file")->required();
  c_stats->add_option("--name", stats.name, "only this tensor (default: all)");
  c_stats->add_option("--out", stats.out, "write CSV here instead of stdout");

  TrainArgs train_args;
  auto add_plan_flags = [&](CLI::App* cmd) {
    cmd->add_option("--plan", train_args.plan, "training plan (JSON)")->required();
    cmd->add_option("--seed", train_args.seed, "override the plan seed");
    cmd->add_option("--epochs", train_args.epochs, "override the epoch count");
    cmd->add_option("--warmup", train_args.warmup, "override the warm-up epoch count");
    cmd->add_option("--data-dir", train_args.data_dir, "directory holding the plan's IDX files");
    cmd->add_flag("--passthrough", train_args.passthrough, "disable every quantization site");
    cmd->add_option("--checkpoint", train_args.checkpoint, "model checkpoint file");
  };
  auto* c_train = app.add_subcommand("train", "train a model from a plan");
  add_plan_flags(c_train);
  c_train->add_option("--metrics", train_args.metrics, "epoch,loss,val_acc CSV (default: stdout)");
  c_train->add_option("--scale-log", train_args.scale_log, "epoch,layer,class,center,sf CSV");
  auto* c_eval = app.add_subcommand("eval", "validation accuracy of a checkpoint");
  add_plan_flags(c_eval);

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("hw-verify", "check the decoder, encoder and MAC models");
  add_format_flags(*c_verify, verify.format);
  c_verify->add_flag("--exhaustive", verify.exhaustive, "enumerate every pattern (n <= 16)");
  c_verify->add_option("--samples", verify.samples, "random samples per check");
  c_verify->add_option("--seed", verify.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.back()->help());
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "posit_cli 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (c_table->parsed()) return cmd_table(table, out);
    if (c_convert->parsed()) return cmd_convert(convert, out);
    if (c_quantize->parsed()) return cmd_quantize(quantize, err);
    if (c_stats->parsed()) return cmd_stats(stats, out);
    if (c_train->parsed()) return cmd_train(train_args, out, err);
    if (c_eval->parsed()) return cmd_eval(train_args, out);
    if (c_verify->parsed()) return cmd_hw_verify(verify, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace posit::cli
