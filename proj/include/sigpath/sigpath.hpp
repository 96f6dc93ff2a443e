#pragma once

#include "sigpath/tensor3.hpp"
#include "sigpath/linalg.hpp"
#include "sigpath/random.hpp"
#include "sigpath/signatures.hpp"
#include "sigpath/rational.hpp"
#include "sigpath/identifiability.hpp"
#include "sigpath/optimize.hpp"
#include "sigpath/recovery.hpp"
#include "sigpath/shortest_path.hpp"
#include "sigpath/io.hpp"
