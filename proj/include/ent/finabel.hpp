#pragma once

// Exact finite abelian group kernel: groups, canonical subgroups,
// homomorphism calculus and Smith normal form.

#include "ent/finabel/group.hpp"
#include "ent/finabel/hom.hpp"
#include "ent/finabel/lattice.hpp"
#include "ent/finabel/snf.hpp"
#include "ent/finabel/subgroup.hpp"
