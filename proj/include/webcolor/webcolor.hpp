#pragma once

#include "webcolor/clustering.hpp"
#include "webcolor/color.hpp"
#include "webcolor/common.hpp"
#include "webcolor/dataset.hpp"
#include "webcolor/ensemble.hpp"
#include "webcolor/features.hpp"
#include "webcolor/fetch.hpp"
#include "webcolor/fixed_part.hpp"
#include "webcolor/histogram.hpp"
#include "webcolor/image.hpp"
#include "webcolor/kmm.hpp"
#include "webcolor/lasso.hpp"
#include "webcolor/pca.hpp"
#include "webcolor/theme_extract.hpp"
#include "webcolor/transfer.hpp"
