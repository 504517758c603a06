#pragma once

#include "orthovar/config.hpp"
#include "orthovar/domain.hpp"

#include <set>
#include <string>

namespace orthovar {

/// Builds a domain from a `[domain]` section: `kind` plus the kind's
/// parameters, optional `reach`, `proj_tol`, `max_iter`. Relative mesh paths
/// resolve against base_dir. Throws InvalidConfig, IoError.
DomainPtr domain_from_section(const ConfigSection& section, const std::string& base_dir = ".");
DomainPtr load_domain(const std::string& path);

ConfigSection domain_section(const ImplicitDomain& domain);
void save_domain(const ImplicitDomain& domain, const std::string& path);

const std::set<std::string>& domain_kinds();

}  // namespace orthovar
