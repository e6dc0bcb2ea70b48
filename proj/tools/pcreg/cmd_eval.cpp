#include "pcreg/cli.hpp"
#include "pcreg/records.hpp"

#include <pcreg/io.hpp>
#include <pcreg/metrics.hpp>

#include <cstdio>
#include <memory>

namespace pcreg::cli {
namespace {

struct EvalOptions {
  std::string in;
  std::string out_dir;
  std::string stage = "auto";
  SuccessCriteria criteria;
};

std::optional<double> field(const ResultRecord& r, PairParameter p) {
  switch (p) {
    case PairParameter::distance: return r.distance;
    case PairParameter::time_offset: return r.dt;
    case PairParameter::overlap: return r.overlap;
    case PairParameter::roll: return r.roll;
    case PairParameter::pitch: return r.pitch;
    case PairParameter::yaw: return r.yaw;
  }
  return std::nullopt;
}

std::string failure_csv(const std::vector<FailureBin>& bins) {
  std::string s = "bin_lo,bin_hi,success,failure,failure_ratio\n";
  for (const auto& b : bins) {
    s += format_real(b.lo) + ',' + format_real(b.hi) + ',' + std::to_string(b.success) + ',' +
         std::to_string(b.failure) + ',' + format_real(b.failure_ratio) + '\n';
  }
  return s;
}

int run_eval(const EvalOptions& o, Context& ctx) {
  const auto records = parse_records(read_file_text(o.in), o.in);
  if (records.empty()) {
    ctx.err << "error: " << o.in << ": no records\n";
    return kDataError;
  }

  std::vector<EvalRecord> evals;
  std::vector<const ResultRecord*> used;
  std::size_t skipped = 0;
  double time_sum = 0.0;
  std::size_t timed = 0;
  for (const auto& r : records) {
    const StageRecord* s = &r.coarse;
    if (o.stage == "refined" || (o.stage == "auto" && r.refined)) {
      if (!r.refined) {
        ++skipped;
        continue;
      }
      s = &*r.refined;
    }
    if (!s->re_deg || !s->te_m) {
      ++skipped;
      continue;
    }
    EvalRecord e;
    e.re_deg = *s->re_deg;
    e.te_m = *s->te_m;
    e.success = is_success(e.re_deg, e.te_m, o.criteria);
    if (s->wall_time) {
      e.wall_time = *s->wall_time;
      time_sum += *s->wall_time;
      ++timed;
    }
    evals.push_back(e);
    used.push_back(&r);
  }
  if (skipped) {
    ctx.err << "warning: " << skipped << " records without ground-truth errors for the "
            << o.stage << " stage were skipped\n";
  }
  if (evals.empty()) {
    ctx.err << "error: " << o.in << ": no evaluable records\n";
    return kDataError;
  }

  char line[64];
  std::snprintf(line, sizeof line, "recall=%.4f\n", recall(evals));
  ctx.out << line;
  ctx.out << "pairs=" << evals.size() << '\n';
  if (timed) {
    std::snprintf(line, sizeof line, "mean_wall_time=%.6f\n", time_sum / double(timed));
    ctx.out << line;
  } else {
    ctx.out << "mean_wall_time=n/a\n";
  }

  if (!o.out_dir.empty()) {
    for (PairParameter p : kAllPairParameters) {
      std::vector<double> values;
      std::size_t missing = 0;
      for (const ResultRecord* r : used) {
        const auto v = field(*r, p);
        if (v) {
          values.push_back(*v);
        } else {
          ++missing;
        }
      }
      if (missing) {
        ctx.err << "warning: " << missing << " records lack '" << to_string(p) << "'; "
                << to_string(p) << " histogram omitted\n";
        continue;
      }
      const auto bins = failure_histogram(values, evals, default_histogram(p));
      write_file(std::filesystem::path(o.out_dir) / ("failure_" + std::string(to_string(p)) + ".csv"),
                 failure_csv(bins));
    }
  }
  return kOk;
}

}  // namespace

void add_eval_command(CLI::App& app, Context& ctx) {
  auto o = std::make_shared<EvalOptions>();
  CLI::App* sub = app.add_subcommand("eval", "Recall, mean time and failure histograms of register output");
  add_config_option(*sub);
  sub->add_option("--in", o->in, "JSON-lines from `pcreg register`")->required();
  sub->add_option("--out-dir", o->out_dir, "Directory for failure_<parameter>.csv");
  sub->add_option("--stage", o->stage, "auto: refined when present, else coarse")
      ->check(CLI::IsMember({"auto", "coarse", "refined"}))
      ->capture_default_str();
  sub->add_option("--re-thresh", o->criteria.max_re_deg, "Success: RE below this, degrees")
      ->capture_default_str();
  sub->add_option("--te-thresh", o->criteria.max_te_m, "Success: TE below this, meters")
      ->capture_default_str();
  sub->callback([o, &ctx] { ctx.exit_code = run_eval(*o, ctx); });
}

}  // namespace pcreg::cli
