#pragma once

#include "geocrowd/batch.hpp"
#include "geocrowd/commands.hpp"
#include "geocrowd/config.hpp"
#include "geocrowd/correct_match.hpp"
#include "geocrowd/datagen.hpp"
#include "geocrowd/domain.hpp"
#include "geocrowd/entropy.hpp"
#include "geocrowd/flow.hpp"
#include "geocrowd/harness.hpp"
#include "geocrowd/online.hpp"
#include "geocrowd/rdb.hpp"
#include "geocrowd/report.hpp"
#include "geocrowd/rng.hpp"
#include "geocrowd/validate.hpp"
