#pragma once

#include "gfod/core.hpp"
#include "gfod/descent.hpp"
#include "gfod/frames.hpp"
#include "gfod/linalg.hpp"
#include "gfod/majorization.hpp"
#include "gfod/norms.hpp"
