#pragma once

// Frozen oracle fixtures. Values were computed by the independent reference
// scripts in tests/oracles/ (splitmix64 + Fisher-Yates traces, mpmath Welch
// t-test at 60 digits) before the implementation was written.

#include <cstdint>
#include <vector>

namespace fixtures {

struct WelchFixture {
  std::vector<double> a;
  std::vector<double> b;
  double t;
  double df;
  double p_greater;
  double p_two_sided;
};

inline const std::vector<WelchFixture>& welch() {
  static const std::vector<WelchFixture> table = {
      {{0.52, 0.55, 0.53}, {0.5, 0.49, 0.51}, 3.1622776601683793, 3.4482758620689655, 0.020957258735727021, 0.041914517471454042},
      {{0.464081, 0.43007, 0.492426, 0.442711, 0.48764}, {0.540286, 0.546784, 0.478105, 0.487701, 0.491863, 0.471278, 0.521208, 0.467871, 0.49316, 0.492859}, -2.3806636120651425, 8.2260549586274296, 0.97816274374162055, 0.043674512516758894},
      {{0.52296, 0.461596, 0.460749, 0.502465, 0.487149, 0.482274, 0.481079, 0.48784}, {0.520478, 0.473022, 0.451444, 0.526716, 0.527654, 0.520656}, -1.1578311319829049, 7.8672598116301192, 0.85956385386374591, 0.28087229227250817},
      {{0.472312, 0.496593, 0.427384}, {0.544522, 0.53217, 0.528172, 0.543106, 0.545695, 0.483421}, -2.8531250997757576, 2.9524464481160763, 0.96691088531842544, 0.066178229363149125},
      {{0.560809, 0.554156, 0.49757, 0.523815, 0.536089, 0.531994, 0.57103}, {0.522884, 0.485345, 0.457344, 0.490849, 0.502493, 0.509713, 0.542117, 0.466645}, 3.073711024976009, 12.993978128702907, 0.0044446712117824556, 0.0088893424235649112},
      {{0.530071, 0.5192, 0.509631, 0.477754, 0.543977}, {0.533894, 0.547888, 0.489076, 0.488112, 0.463816, 0.468455}, 0.97624181393721583, 8.8700050441527942, 0.17740808724896568, 0.35481617449793135},
      {{0.469808, 0.487369, 0.495395, 0.484123, 0.517973, 0.526339, 0.550322, 0.496442}, {0.474597, 0.53046, 0.522016, 0.486941, 0.49514, 0.542123}, -0.35401472436251322, 10.786369842549478, 0.63492455364173406, 0.73015089271653188},
      {{0.410128, 0.452021, 0.42408, 0.432396, 0.445423, 0.504712, 0.436737, 0.412846, 0.482627, 0.480417}, {0.459361, 0.518053, 0.49721}, -2.1804527058701802, 3.5139257345405407, 0.94794497752275932, 0.10411004495448135},
      {{0.484959, 0.478129, 0.470889, 0.486296, 0.468736, 0.472555, 0.472411, 0.419869, 0.457327, 0.442255, 0.457393}, {0.539227, 0.529195, 0.455323, 0.456383, 0.526984, 0.450374, 0.507727, 0.541782, 0.463641, 0.485301, 0.452099}, -2.1003736050891876, 15.010382450104103, 0.97349718901324789, 0.053005621973504224},
      {{0.541971, 0.477991, 0.542373, 0.538349, 0.499232, 0.519686, 0.550092}, {0.459151, 0.470679, 0.480324, 0.511518, 0.539571, 0.497523, 0.548676, 0.496431, 0.537616}, 1.3341665706749551, 13.891254510937272, 0.10180482769686701, 0.20360965539373402},
      {{0.480898, 0.442987, 0.504613, 0.47082, 0.509333, 0.429218, 0.490603, 0.485306, 0.46098, 0.430247, 0.465524}, {0.5137, 0.519226, 0.452332, 0.471207}, -1.0426298804285184, 4.6698488290209553, 0.82597074440759844, 0.34805851118480312},
      {{0.502468, 0.571524, 0.485434, 0.542384, 0.482613, 0.531052, 0.519494, 0.474563, 0.525432, 0.530454}, {0.515054, 0.460353, 0.546082, 0.508571, 0.451167, 0.529739, 0.519829, 0.485302, 0.524121, 0.525434, 0.518315}, 0.67971405485763182, 18.722945971765838, 0.25250168811013153, 0.50500337622026306},
      {{0.634342, 0.579219, 0.589216, 0.565513}, {0.523403, 0.473102, 0.542315, 0.488096, 0.482841, 0.50147, 0.519298, 0.544456}, 4.666892380987414, 5.5859431467804088, 0.0020715722743462887, 0.0041431445486925773},
      {{0.52388, 0.597487, 0.573521, 0.543053, 0.592278, 0.588399, 0.572911, 0.52509}, {0.521166, 0.524906, 0.542406, 0.503305, 0.53612, 0.512311, 0.484162, 0.538143, 0.503576, 0.515146, 0.464235}, 4.0249194765500798, 12.990233051479434, 0.0007224449001258705, 0.001444889800251741},
      {{0.554921, 0.591068, 0.548049, 0.570435, 0.597499, 0.618185}, {0.504008, 0.474562, 0.51521, 0.486993, 0.471901, 0.458755, 0.485969, 0.480355, 0.518875, 0.485766}, 7.3080012909632007, 8.0905681570023537, 3.9303287114237975e-5, 7.860657422847595e-5},
      {{0.602139, 0.585122, 0.592655, 0.623204, 0.593953, 0.603969, 0.582792, 0.62185, 0.602987, 0.63327, 0.599175}, {0.486815, 0.538007, 0.452538, 0.545654, 0.453776, 0.481037, 0.518441}, 7.0468555446997713, 7.3916248625336301, 7.8571019346402774e-5, 0.00015714203869280555},
      {{0.548311, 0.541297, 0.611298, 0.554576, 0.583636}, {0.511623, 0.493845, 0.48459, 0.485312, 0.481024}, 5.4085258134579316, 5.3819441129653023, 0.001163776806414026, 0.002327553612828052},
      {{0.391775, 0.402822, 0.376095, 0.38659, 0.416673, 0.401202, 0.419747, 0.401592}, {0.466611, 0.462532, 0.513704, 0.518983, 0.485277, 0.451847}, -6.676942476469704, 7.0547226263483405, 0.99986304741456111, 0.00027390517087778961},
      {{0.402464, 0.444144, 0.385026}, {0.467276, 0.452614, 0.475538, 0.511965, 0.450787, 0.455336, 0.468638, 0.508953, 0.492303, 0.459198, 0.491966}, -3.4803018841874305, 2.6132344143070297, 0.97522620099891207, 0.049547598002175864},
      {{0.40754, 0.44248, 0.438548, 0.446745, 0.438508, 0.421405, 0.447993, 0.464482, 0.381315, 0.452623, 0.440628}, {0.482226, 0.475544, 0.502326, 0.496171, 0.451033, 0.526624}, -4.2917366759987671, 9.5099462287961794, 0.99911252415425594, 0.0017749516914881183},
      {{0.37752, 0.38666, 0.419257, 0.405525, 0.404009, 0.395256, 0.411951, 0.422195, 0.435369, 0.364952, 0.402056}, {0.507484, 0.533656, 0.547079, 0.511108, 0.515748, 0.509599}, -13.197389943919857, 12.811578947340832, 0.99999999607075525, 7.8584894953680377e-9},
      {{0.433017, 0.423175, 0.43051, 0.456956}, {0.469309, 0.502106, 0.549681, 0.470191, 0.521609, 0.527653}, -4.6823808118661094, 7.3740366236567003, 0.99901895459403794, 0.001962090811924122},
      {{0.415369, 0.439162, 0.420725, 0.456046}, {0.517039, 0.514288, 0.524461, 0.489345, 0.520088, 0.520911, 0.54915, 0.517168, 0.535853}, -8.2120048926694319, 5.1640826618122182, 0.99981339241484614, 0.00037321517030772889},
      {{0.429165, 0.478274, 0.466791, 0.489131, 0.459843}, {0.493691, 0.501482, 0.451341, 0.492211, 0.498985, 0.466247, 0.462019, 0.530519}, -1.6415888435873047, 9.4928718927516488, 0.9333314529097714, 0.1333370941804572},
      {{0.470984, 0.505247, 0.51538, 0.520054}, {0.475536, 0.48412, 0.539001, 0.549058, 0.474498, 0.522291}, -0.25590675152117148, 7.983378042154868, 0.59775339575502948, 0.80449320848994104},
      {{0.533582, 0.515465, 0.499584, 0.514734, 0.477303, 0.46185, 0.457007, 0.500305}, {0.538674, 0.515365, 0.494014, 0.467914, 0.511629, 0.547378}, -1.1445701724163112, 10.493941069755581, 0.86108896024922363, 0.27782207950155274},
      {{0.484546, 0.501823, 0.465018, 0.467566, 0.457542, 0.490938, 0.497698, 0.469527, 0.502343, 0.449823, 0.487193, 0.509023}, {0.538617, 0.487401, 0.512903, 0.546728}, -2.7111150261134468, 4.1111440776275834, 0.97403740078713267, 0.051925198425734659},
      {{0.529511, 0.50802, 0.577116, 0.575357, 0.521397, 0.555584, 0.510973, 0.508931, 0.55661, 0.578637}, {0.480804, 0.522526, 0.502436, 0.508818, 0.462531, 0.489287, 0.455934, 0.47666, 0.534479, 0.489749, 0.482902}, 4.2921132933297511, 17.380956076635589, 0.00023562223682138088, 0.00047124447364276177},
      {{0.624566, 0.590903, 0.551753, 0.598332, 0.600898, 0.621057, 0.63955, 0.606171, 0.547613}, {0.529888, 0.457031, 0.525605, 0.504474, 0.531181, 0.467018, 0.455432}, 6.0715909490354145, 12.20625292889992, 2.5908494165852031e-5, 5.1816988331704062e-5},
      {{0.542284, 0.44745, 0.491057}, {0.456907, 0.528364, 0.546655, 0.509252, 0.525275, 0.491397}, -0.52887176410644994, 2.9434214326705342, 0.6829121642674685, 0.63417567146506299},
      {{0.468735, 0.507275, 0.474716}, {0.51904, 0.505435, 0.484203, 0.522728, 0.53031, 0.52955, 0.507396, 0.532543, 0.518429, 0.451829, 0.505769}, -1.8727280935181106, 3.6158397720498862, 0.92902057653933181, 0.14195884692133637},
      {{0.502365, 0.520663, 0.562059, 0.584854, 0.590312, 0.522633, 0.520566, 0.512943, 0.569712}, {0.493688, 0.514848, 0.500695, 0.524386, 0.453891, 0.48402, 0.502855, 0.479954, 0.513255, 0.475864, 0.476517}, 3.902623666512343, 12.840414269360224, 0.00092890856022155354, 0.0018578171204431071},
      {{0.513353, 0.545873, 0.511873, 0.510625, 0.501928, 0.459447, 0.501077}, {0.52869, 0.540874, 0.534916, 0.479349, 0.506881, 0.518187, 0.544329, 0.468357}, -0.63859328564007941, 12.98154323792032, 0.73290379819527709, 0.53419240360944582},
      {{0.471479, 0.522197, 0.491616, 0.487018, 0.46941, 0.433507, 0.502034, 0.444265, 0.475682, 0.488138}, {0.507018, 0.546164, 0.456473, 0.468213, 0.475349, 0.49034, 0.510352, 0.493085, 0.540252, 0.524406}, -1.7965660900148151, 17.651484110378844, 0.95523071377754818, 0.089538572444903641},
      {{0.431501, 0.449369, 0.397657, 0.432115, 0.40727, 0.41805, 0.395488, 0.404665, 0.440747, 0.371901, 0.445586}, {0.546313, 0.452954, 0.460196, 0.50345, 0.537716, 0.535514, 0.460745, 0.515748, 0.497304, 0.538142, 0.490295, 0.480742}, -6.9046929452228892, 20.059672328134989, 0.99999948474891676, 1.0305021664839115e-6},
      {{0.533882, 0.458726, 0.52825, 0.541487, 0.482026, 0.526379, 0.533037, 0.494109, 0.54957, 0.473452, 0.517598, 0.546916}, {0.535611, 0.541166, 0.460117, 0.507412, 0.511511, 0.509976, 0.483379, 0.545265, 0.454901, 0.464604, 0.459788}, 1.3034075051689735, 20.088372428329951, 0.10358853751647443, 0.20717707503294887},
      {{0.428857, 0.427056, 0.456356, 0.44547}, {0.501187, 0.529667, 0.455374, 0.526139}, -3.4413770566541126, 3.9753845046303734, 0.98674054482616866, 0.026518910347662689},
      {{0.56616, 0.580605, 0.625813, 0.631918, 0.639954, 0.57226, 0.619074, 0.566681}, {0.476857, 0.49363, 0.531836, 0.504452, 0.477945, 0.460455, 0.498562}, 7.618833593436221, 12.643943110596361, 2.2510087591516596e-6, 4.5020175183033191e-6},
      {{0.448829, 0.464465, 0.486354, 0.480228, 0.454254}, {0.527007, 0.549039, 0.497842, 0.462417, 0.539183, 0.51218, 0.490454, 0.54438}, -3.7512941176612224, 10.883165633470132, 0.99836911309548407, 0.0032617738090318642},
      {{0.390291, 0.387217, 0.46155, 0.467933, 0.414608}, {0.534934, 0.474097, 0.475346, 0.536064, 0.505797, 0.536737, 0.515752, 0.471788, 0.491445, 0.494506, 0.537338, 0.4625}, -4.124184579281271, 5.946010927395706, 0.99684566497006403, 0.0063086700598719325},
      {{0.43836, 0.417361, 0.462199}, {0.469438, 0.540289, 0.47095, 0.537694, 0.471265, 0.529733, 0.477989, 0.486737, 0.450339}, -3.108121204824572, 5.413775494627435, 0.98803386624239106, 0.02393226751521788},
      {{0.579487, 0.540718, 0.55115, 0.564102, 0.606757, 0.516003, 0.572994, 0.5161}, {0.515348, 0.466398, 0.518932, 0.53419, 0.540751, 0.482161, 0.538999, 0.49498, 0.502971, 0.525885}, 3.2115395068502774, 13.243380630331162, 0.0033368151007939085, 0.006673630201587817},
      {{0.523847, 0.559078, 0.581613, 0.495763, 0.54626, 0.571784, 0.561149, 0.55452, 0.556091, 0.493108}, {0.546814, 0.496178, 0.525826, 0.457919, 0.466759, 0.496224}, 2.7333276100037873, 9.7183209941339221, 0.010797599175352229, 0.021595198350704458},
      {{0.431128, 0.460042, 0.428511, 0.428786}, {0.484608, 0.545765, 0.512384, 0.480275, 0.549514, 0.510015, 0.518367, 0.505613, 0.522252}, -7.0321375389851373, 8.9248882971413564, 0.99996816928279038, 6.3661434419245729e-5},
      {{0.531507, 0.503147, 0.463693, 0.48948, 0.469031}, {0.491896, 0.537006, 0.520021, 0.455549, 0.494654, 0.468754, 0.453549, 0.499797, 0.510882, 0.469003, 0.463066, 0.532365}, -0.00046160273782499794, 8.0890454026067192, 0.50017856227467561, 0.99964287545064877},
      {{0.451319, 0.428048, 0.414307, 0.414628, 0.443825, 0.440642, 0.418349, 0.49375, 0.509895, 0.431432, 0.434664}, {0.492866, 0.512299, 0.549447, 0.485031, 0.487197, 0.499835, 0.476929, 0.549024, 0.497313}, -4.7689815743207873, 17.948824939094725, 0.99992270610700051, 0.00015458778599898975},
      {{0.419272, 0.441319, 0.395208, 0.419236}, {0.455469, 0.463903, 0.533817, 0.528954, 0.519671, 0.463294, 0.481912, 0.474894, 0.543033}, -5.1789269148737505, 10.198792151770434, 0.99980584641262182, 0.0003883071747563618},
      {{0.59944, 0.58878, 0.591895, 0.587956, 0.596968, 0.55206, 0.634843, 0.55871, 0.597111}, {0.486884, 0.515675, 0.49732, 0.521958, 0.54573, 0.545314, 0.493335, 0.485036, 0.547421}, 6.289899632445053, 15.897984792583968, 5.5460166516846859e-6, 1.1092033303369372e-5},
      {{0.587979, 0.573387, 0.562862, 0.606124, 0.56529, 0.537819, 0.561124, 0.548182, 0.543906}, {0.501126, 0.536808, 0.475266, 0.455798}, 3.8482478229051919, 4.0686424050796472, 0.008878139650967056, 0.017756279301934112},
      {{0.516603, 0.569135, 0.535166, 0.571603, 0.543549, 0.541992, 0.500475}, {0.482054, 0.519392, 0.470924, 0.549635, 0.543679, 0.455184, 0.470698, 0.51704, 0.47515, 0.486048, 0.536135}, 2.7973413058330302, 15.236200846175489, 0.0066886139479744814, 0.013377227895948963},
  };
  return table;
}

// select_random traces: (pool size, k, seed) -> pool indices.
inline const std::vector<std::size_t> kRandomPool5K2Seed7 = {2, 1};
inline const std::vector<std::size_t> kRandomPool10K10Seed3 = {3, 4, 0, 2, 1, 5, 6, 8, 7, 9};
inline const std::vector<std::size_t> kRandomPool8K3Seed123 = {3, 6, 1};

// k-means representative traces over the 8-point two-cluster fixture.
inline const std::vector<std::vector<double>> kKmeansPoints = {
    {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0},
    {20.0, 0.0}, {21.0, 0.0}, {20.0, 1.0}, {21.0, 1.0},
};
inline const std::vector<std::size_t> kKmeansK2Seed5 = {0, 4};
inline const std::vector<std::size_t> kKmeansK4Seed11 = {5, 0, 6, 2};

// Noise traces: (victim position, donor position).
inline const std::vector<std::pair<std::size_t, std::size_t>> kNoiseK4R05Seed9 = {
    {0, 1}, {2, 0}};
inline const std::vector<std::pair<std::size_t, std::size_t>> kNoiseK6R025Seed2 = {
    {4, 1}, {2, 1}};

// First outputs of splitmix64(seed=42), from the reference script.
inline const std::vector<std::uint64_t> kSplitMix42 = {
    0xbdd732262feb6e95ULL, 0x28efe333b266f103ULL,
    0x47526757130f9f52ULL, 0x581ce1ff0e4ae394ULL};

}  // namespace fixtures
