#pragma once

namespace CLI {
class App;
}

namespace anchorkit::cli {

void register_stride_advice(CLI::App& app);
void register_rf(CLI::App& app);
void register_priors(CLI::App& app);
void register_coverage(CLI::App& app);
void register_loss(CLI::App& app);
void register_nms(CLI::App& app);
void register_eval(CLI::App& app);
void register_synth(CLI::App& app);
void register_import_dtld(CLI::App& app);

}  // namespace anchorkit::cli
