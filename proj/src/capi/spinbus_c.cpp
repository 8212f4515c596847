#include "spinbus/spinbus.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <string>

#include "core/commands.hpp"
#include "core/effective.hpp"
#include "core/eigensolver.hpp"
#include "core/errors.hpp"
#include "core/model.hpp"

struct spinbus_spec {
  spinbus::SpinSystemSpec spec;
};

struct spinbus_spectrum {
  spinbus::Spectrum spectrum;
};

struct spinbus_run {
  spinbus::CommandResult result;
  std::string resolved;
};

namespace {

thread_local std::string last_error;

spinbus_status fail(spinbus_status status, const char* what) {
  last_error = what;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
spinbus_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return SPINBUS_OK;
  } catch (const spinbus::ParameterError& e) {
    return fail(SPINBUS_ERR_PARAMETER, e.what());
  } catch (const spinbus::ResourceError& e) {
    return fail(SPINBUS_ERR_RESOURCE, e.what());
  } catch (const spinbus::ConvergenceError& e) {
    return fail(SPINBUS_ERR_CONVERGENCE, e.what());
  } catch (const spinbus::StateError& e) {
    return fail(SPINBUS_ERR_STATE, e.what());
  } catch (const spinbus::UsageError& e) {
    return fail(SPINBUS_ERR_USAGE, e.what());
  } catch (const spinbus::ConfigError& e) {
    return fail(SPINBUS_ERR_CONFIG, e.what());
  } catch (const spinbus::IoError& e) {
    return fail(SPINBUS_ERR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SPINBUS_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPINBUS_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPINBUS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPINBUS_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw spinbus::ParameterError(what);
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

spinbus_status make_linear(int n, const double* couplings, const double* fields, bool ring, spinbus_spec** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    require(n >= 2, "a chain needs at least two sites");
    require(couplings != nullptr && fields != nullptr, "null coupling or field array");
    const auto nb = static_cast<std::size_t>(ring ? n : n - 1);
    std::span<const double> j(couplings, nb), b(fields, static_cast<std::size_t>(n));
    *out = new spinbus_spec{ring ? spinbus::make_ring(n, j, b) : spinbus::make_chain(n, j, b)};
  });
}

}  // namespace

extern "C" {

const char* spinbus_version(void) { return SPINBUS_VERSION; }

const char* spinbus_last_error(void) { return last_error.c_str(); }

const char* spinbus_status_name(spinbus_status status) {
  switch (status) {
    case SPINBUS_OK: return "ok";
    case SPINBUS_ERR_PARAMETER: return "parameter error";
    case SPINBUS_ERR_RESOURCE: return "resource error";
    case SPINBUS_ERR_CONVERGENCE: return "convergence error";
    case SPINBUS_ERR_STATE: return "state error";
    case SPINBUS_ERR_USAGE: return "usage error";
    case SPINBUS_ERR_CONFIG: return "configuration error";
    case SPINBUS_ERR_IO: return "I/O error";
    default: return "internal error";
  }
}

spinbus_status spinbus_spec_chain(int n, const double* couplings, const double* fields, spinbus_spec** out) {
  return make_linear(n, couplings, fields, false, out);
}

spinbus_status spinbus_spec_ring(int n, const double* couplings, const double* fields, spinbus_spec** out) {
  return make_linear(n, couplings, fields, true, out);
}

spinbus_status spinbus_spec_from_json(const char* json, spinbus_spec** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = new spinbus_spec{spinbus::spec_from_json(json)};
  });
}

spinbus_status spinbus_spec_to_json(const spinbus_spec* spec, char** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    *out = duplicate(spinbus::spec_to_json(spec->spec));
  });
}

spinbus_status spinbus_spec_attach_qubit(const spinbus_spec* bus, char qubit, int bus_site, double coupling,
                                         spinbus_spec** out) {
  return guarded([&] {
    require(bus != nullptr && out != nullptr, "null argument");
    const spinbus::QubitAttachment a{qubit, bus_site - 1, coupling};
    *out = new spinbus_spec{spinbus::attach_qubits(bus->spec, std::span(&a, 1))};
  });
}

int spinbus_spec_n_sites(const spinbus_spec* spec) { return spec ? spec->spec.n_sites() : 0; }

void spinbus_spec_free(spinbus_spec* spec) { delete spec; }

spinbus_status spinbus_full_spectrum(const spinbus_spec* spec, spinbus_spectrum** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    *out = new spinbus_spectrum{spinbus::full_spectrum(spec->spec)};
  });
}

spinbus_status spinbus_lowest_k(const spinbus_spec* spec, size_t k, spinbus_spectrum** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    *out = new spinbus_spectrum{spinbus::lowest_k(spec->spec, k)};
  });
}

size_t spinbus_spectrum_size(const spinbus_spectrum* spectrum) { return spectrum ? spectrum->spectrum.size() : 0; }

spinbus_status spinbus_spectrum_level(const spinbus_spectrum* spectrum, size_t level, double* energy, double* sz) {
  return guarded([&] {
    require(spectrum != nullptr, "null spectrum");
    const auto& l = spectrum->spectrum.level(level);
    if (energy) *energy = l.energy;
    if (sz) *sz = l.sz();
  });
}

spinbus_status spinbus_local_moments(const spinbus_spectrum* spectrum, size_t level, double* out, size_t n) {
  return guarded([&] {
    require(spectrum != nullptr && out != nullptr, "null argument");
    const auto m = spinbus::local_moments(spectrum->spectrum, level);
    require(n >= m.size(), "output buffer smaller than the number of sites");
    std::copy(m.begin(), m.end(), out);
  });
}

spinbus_status spinbus_j2_exact(const spinbus_spectrum* spectrum, int i, int j, char axis, double* k, int* warning) {
  return guarded([&] {
    require(spectrum != nullptr && k != nullptr, "null argument");
    require(axis == 'x' || axis == 'z', "axis must be 'x' or 'z'");
    const auto r = spinbus::j2_exact(spectrum->spectrum, i - 1, j - 1,
                                     axis == 'x' ? spinbus::PauliAxis::x : spinbus::PauliAxis::z);
    *k = r.k;
    if (warning) *warning = r.warning ? 1 : 0;
  });
}

void spinbus_spectrum_free(spinbus_spectrum* spectrum) { delete spectrum; }

spinbus_status spinbus_run_command(const char* command, const char* config_json, unsigned threads, spinbus_run** out) {
  return guarded([&] {
    require(command != nullptr && config_json != nullptr && out != nullptr, "null argument");
    auto run = std::make_unique<spinbus_run>();
    run->result = spinbus::run_command(command, nlohmann::json::parse(config_json), threads);
    run->resolved = run->result.resolved_config.dump();
    *out = run.release();
  });
}

size_t spinbus_run_file_count(const spinbus_run* run) { return run ? run->result.files.size() : 0; }

const char* spinbus_run_file_name(const spinbus_run* run, size_t index) {
  if (!run || index >= run->result.files.size()) return nullptr;
  return run->result.files[index].name.c_str();
}

spinbus_status spinbus_run_file_content(const spinbus_run* run, size_t index, const char** data, size_t* size) {
  return guarded([&] {
    require(run != nullptr && data != nullptr && size != nullptr, "null argument");
    require(index < run->result.files.size(), "file index out of range");
    const auto& f = run->result.files[index];
    *data = f.content.data();
    *size = f.content.size();
  });
}

size_t spinbus_run_warning_count(const spinbus_run* run) { return run ? run->result.warnings.size() : 0; }

const char* spinbus_run_warning(const spinbus_run* run, size_t index) {
  if (!run || index >= run->result.warnings.size()) return nullptr;
  return run->result.warnings[index].c_str();
}

const char* spinbus_run_resolved_config(const spinbus_run* run) { return run ? run->resolved.c_str() : nullptr; }

void spinbus_run_free(spinbus_run* run) { delete run; }

void spinbus_string_free(char* s) { std::free(s); }

}  // extern "C"
