#pragma once

#include "permdyn/core.hpp"
#include "permdyn/permutation.hpp"
#include "permdyn/qudit_state.hpp"
#include "permdyn/symmetric_dynamics.hpp"
#include "permdyn/z2_conservation.hpp"
#include "permdyn/fermion_correspondence.hpp"
#include "permdyn/schur_weyl.hpp"
#include "permdyn/random_ensembles.hpp"
#include "permdyn/io.hpp"
#include "permdyn/experiment.hpp"
