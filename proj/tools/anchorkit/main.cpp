#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/error.hpp"
#include "anchorkit/version.hpp"
#include "commands.hpp"

namespace {

bool g_json_errors = false;

void report_error(const std::string& type, const std::string& message) {
  if (g_json_errors) {
    nlohmann::ordered_json err;
    err["error"]["type"] = type;
    err["error"]["message"] = message;
    std::cerr << err.dump() << "\n";
  } else {
    std::cerr << "anchorkit: " << type << ": " << message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchor-box geometry, receptive fields, matching, NMS, and detection evaluation"};
  app.set_version_flag("--version", std::string("anchorkit ") + anchorkit::kVersion);
  app.require_subcommand(1);
  app.add_flag("--json-errors", g_json_errors, "print errors as JSON objects on stderr");

  anchorkit::cli::register_stride_advice(app);
  anchorkit::cli::register_rf(app);
  anchorkit::cli::register_priors(app);
  anchorkit::cli::register_coverage(app);
  anchorkit::cli::register_loss(app);
  anchorkit::cli::register_nms(app);
  anchorkit::cli::register_eval(app);
  anchorkit::cli::register_synth(app);
  anchorkit::cli::register_import_dtld(app);

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help / --version exit through here.
      return app.exit(e);
    }
    report_error("usage", e.what());
    return 1;
  } catch (const anchorkit::ParseError& e) {
    report_error("parse", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    report_error("invalid-argument", e.what());
    return 1;
  } catch (const std::out_of_range& e) {
    report_error("invalid-argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 2;
  }
}
