// Copyright 2026 The qrng-bs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qrng: simulate beam-splitter quantum random number generators, extract
// bits and verify them.
//
//   qrng generate --protocol epr-xor --theta-b 90 --events 1000000 --seed 7 --out bits.bin
//   qrng analyze bits.bin
//   qrng sweep --theta-grid 0,45,90 --bias-grid 0,0.05 --events 1000000 --seed 7
//   qrng chsh --events 1000000 --seed 7
//   qrng selftest

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "qrng/cli/app.hpp"

namespace {

using qrng::cli::RunConfig;

void add_run_options(CLI::App& cmd, RunConfig& rc) {
  cmd.add_option("--events,-n", rc.events, "Number of simulated events N");
  cmd.add_option("--seed", rc.seed, "Master seed (required)");
  cmd.add_option("--block-size", rc.block_size, "Events per substream block")->capture_default_str();
  cmd.add_option("--workers", rc.workers, "Worker threads (output is independent of this)")->capture_default_str();
  cmd.add_option("--report", rc.report, "Also write the JSON report to this path");
}

void add_source_options(CLI::App& cmd, RunConfig& rc) {
  cmd.add_option("--dim", rc.dim, "Outcome dimension (2, 3, 4, ...)");
  cmd.add_option("--spin", rc.spin, "Spin of the singlet pair: 1/2, 1 or 3/2");
  cmd.add_option("--detector-bias", rc.detector_bias, "Stick probability beta of both detectors")->capture_default_str();
  cmd.add_option("--preferred-outcome", rc.preferred_outcome, "Outcome a stuck detector reports")
      ->capture_default_str();
  cmd.add_option("--no-click-prob", rc.no_click_prob, "Probability a detection is lost")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-splitter quantum random number generator simulator"};
  app.set_version_flag("--version", qrng::cli::kVersion);
  app.require_subcommand(1);

  RunConfig rc;
  qrng::cli::AnalyzeOptions analyze_opts;

  auto* gen = app.add_subcommand("generate", "Run a protocol and write an extracted bit stream");
  gen->add_option("--protocol", rc.protocol, "single-conjugate | epr-xor | epr-adaptive")
      ->capture_default_str()
      ->check(CLI::IsMember({"single-conjugate", "epr-xor", "epr-adaptive"}));
  add_source_options(*gen, rc);
  gen->add_option("--prep-basis", rc.prep_basis, "computational | fourier")->capture_default_str();
  gen->add_option("--prep-index", rc.prep_index, "Preparation basis vector")->capture_default_str();
  gen->add_option("--meas-basis", rc.meas_basis, "computational | fourier")->capture_default_str();
  gen->add_option("--theta-a", rc.theta_a_deg, "Alice's angle, degrees")->capture_default_str();
  gen->add_option("--theta-b", rc.theta_b_deg, "Bob's angle, degrees")->capture_default_str();
  gen->add_option("--adapt", rc.adapt, "Adaptive map 'outcome:degrees,...' (epr-adaptive)");
  gen->add_option("--keep", rc.keep, "Downgrade by elimination, keeping symbols 'a,b'");
  gen->add_option("--partition", rc.partition, "Downgrade by identification, e.g. '0,1|2,3'");
  gen->add_option("--out", rc.out, "Bitstream output path (sidecar written to PATH.json)");
  gen->add_option("--format", rc.format, "raw | hex")->capture_default_str();
  gen->add_option("--significance", rc.significance, "Battery significance level")->capture_default_str();
  std::string from_config;
  gen->add_option("--from-config", from_config,
                  "Take protocol parameters from a sidecar or report (output options still apply)");
  add_run_options(*gen, rc);

  auto* ana = app.add_subcommand("analyze", "Run the statistical battery on a stored bit stream");
  ana->add_option("path", analyze_opts.path, "Bitstream file")->required();
  ana->add_option("--significance", analyze_opts.significance, "Significance level")->capture_default_str();
  ana->add_flag("--raw", analyze_opts.raw, "Treat the file as a bare payload without a sidecar");
  ana->add_option("--format", analyze_opts.format, "Payload format with --raw: raw | hex")->capture_default_str();
  ana->add_option("--report", analyze_opts.report, "Also write the JSON report to this path");

  auto* sweep = app.add_subcommand("sweep", "XOR-output bias over relative angle and detector bias");
  sweep->add_option("--theta-grid", rc.theta_grid, "Relative angles, degrees, comma separated")->required();
  sweep->add_option("--bias-grid", rc.bias_grid, "Detector biases epsilon, comma separated")->required();
  sweep->add_option("--spin", rc.spin, "Spin (1/2 only)");
  sweep->add_option("--no-click-prob", rc.no_click_prob, "Probability a detection is lost")->capture_default_str();
  sweep->add_option("--table-format", rc.table_format, "csv | json")->capture_default_str();
  sweep->add_option("--out", rc.out, "Write the table here instead of stdout");
  add_run_options(*sweep, rc);

  auto* chsh = app.add_subcommand("chsh", "Estimate the CHSH value S for the spin-1/2 singlet");
  chsh->add_option("--alpha", rc.alpha_deg, "Alice setting a, degrees")->capture_default_str();
  chsh->add_option("--alpha-prime", rc.alpha_prime_deg, "Alice setting a', degrees")->capture_default_str();
  chsh->add_option("--beta", rc.beta_deg, "Bob setting b, degrees")->capture_default_str();
  chsh->add_option("--beta-prime", rc.beta_prime_deg, "Bob setting b', degrees")->capture_default_str();
  add_run_options(*chsh, rc);

  auto* self = app.add_subcommand("selftest", "Run the reduced-size invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qrng::cli::kExitFailure;
  }

  try {
    qrng::cli::CommandResult result;
    if (gen->parsed()) {
      if (!from_config.empty()) {
        RunConfig loaded = qrng::cli::load_run_config(from_config);
        loaded.out = rc.out;
        loaded.format = rc.format;
        loaded.report = rc.report;
        loaded.workers = rc.workers;
        rc = loaded;
      }
      result = qrng::cli::cmd_generate(rc);
    } else if (ana->parsed()) {
      result = qrng::cli::cmd_analyze(analyze_opts);
    } else if (sweep->parsed()) {
      result = qrng::cli::cmd_sweep(rc);
      if (rc.out.empty()) std::cout << result.table;
      return result.exit_code;
    } else if (chsh->parsed()) {
      result = qrng::cli::cmd_chsh(rc);
    } else if (self->parsed()) {
      result = qrng::cli::cmd_selftest();
    }
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
  } catch (const qrng::cli::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return qrng::cli::kExitFailure;
  } catch (const qrng::cli::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return qrng::cli::kExitIo;
  } catch (const qrng::cli::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return qrng::cli::kExitIo;
  } catch (const qrng::cli::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return qrng::cli::kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return qrng::cli::kExitFailure;
  }
}
