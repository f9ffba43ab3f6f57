#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "magspec/geometry/adapted_frame.hpp"
#include "magspec/io/config.hpp"
#include "magspec/model/band_curve.hpp"

namespace magspec::io {

/// Process exit codes of the magspec tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,      // bad config, arguments, or unwritable output
  kExitSolver = 2,      // a solver failed or the box is too small
  kExitAssumption = 3,  // an analysis hypothesis does not hold
};

/// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& e);

/// Chart, field and patch described by the [geometry] section.
geometry::FrameSpec frame_spec(const RunConfig::Geometry& g);

/// The band curve for a run: band.file if set, else <out>/band_curve.json
/// when present, else computed on the [band] grid.
std::shared_ptr<const model::BandCurve> resolve_band(const RunConfig& config);

/// Writes text to path through a temporary file and a rename, so a reader
/// never sees a partial file.
void write_file(const std::filesystem::path& path, const std::string& text);

/// JSON document with "schema" and the resolved config folded in.
nlohmann::json stamp(nlohmann::json j, const RunConfig& config);

struct CommandOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
};

CommandOutcome cmd_band(const RunConfig& config);
CommandOutcome cmd_beta(const RunConfig& config);
CommandOutcome cmd_predict(const RunConfig& config);
CommandOutcome cmd_validate(const RunConfig& config);
CommandOutcome cmd_model(const RunConfig& config);

/// Dispatches on config.run.command and turns errors into exit codes with a
/// one-line message on err.
int run_command(const RunConfig& config, std::ostream& err);

}  // namespace magspec::io
