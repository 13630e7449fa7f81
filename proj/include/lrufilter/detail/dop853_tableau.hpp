// Copyright 2026 The lrufilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>

// Dormand-Prince 8(5,3) coefficients (Hairer, Norsett & Wanner, "Solving
// Ordinary Differential Equations I", DOP853). The error weights e3/e5 carry a
// 13th entry multiplying the FSAL stage f(t + h, y_new).
namespace lrufilter::detail::dop853 {

inline constexpr int stages = 12;

inline constexpr std::array<double, 12> c{
    0.000000000000000000000000000000e+00,
    5.260015195876772964300727153386e-02,
    7.890022793815160140340481120802e-02,
    1.183503419072274021051072168120e-01,
    2.816496580927725923437776600622e-01,
    3.333333333333333148296162562474e-01,
    2.500000000000000000000000000000e-01,
    3.076923076923077093880465326947e-01,
    6.512820512820512997009814171179e-01,
    5.999999999999999777955395074969e-01,
    8.571428571428570952761560874933e-01,
    1.000000000000000000000000000000e+00};

inline constexpr std::array<std::array<double, 12>, 12> a{{
    {0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {5.260015195876772964300727153386e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {1.972505698453790035085120280200e-02, 5.917517095361370105255360840601e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {2.958758547680685052627680420301e-02, 0.000000000000000000000000000000e+00, 8.876275643042054463993650870179e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {2.413651341592666921265220025816e-01, 0.000000000000000000000000000000e+00, -8.845494793282860923611110592901e-01, 9.248340032617919925783667167707e-01, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {3.703703703703703498106847291638e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 1.708286087294738631037205323082e-01, 1.254676875668224167448272510228e-01, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {3.710937500000000000000000000000e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 1.702522110195440474544881226393e-01, 6.021653898045595948440578126792e-02, -1.757812500000000000000000000000e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {3.709200011850478928554508684101e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 1.703839257122399808430657230929e-01, 1.072620304463732798794239897688e-01, -1.531943774862440203754498924127e-02, 8.273789163814023253640250743501e-03, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {6.241109587160756921875304215064e-01, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, -3.360892629446941448634333937662e+00, -8.682193468417259696323640127957e-01, 2.759209969944670959307586599607e+01, 2.015406755047789388868295645807e+01, -4.348988418106996078904558089562e+01, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {4.776625364382643401661709958717e-01, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, -2.488114619971667718090202470194e+00, -5.902908268368429745009962061886e-01, 2.123005144818119305227810400538e+01, 1.527923363288242342150624608621e+01, -3.328821096898486331383537617512e+01, -2.033120170850862690192784043575e-02, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {-9.371424300859872991154020382965e-01, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, 5.186372428844063797725993936183e+00, 1.091437348996729506112046692579e+00, -8.149787010746926796400657622144e+00, -1.852006565999695908431021962315e+01, 2.273948709935050516151022748090e+01, 2.493605552679652337388915839256e+00, -3.046764471898219639456328877714e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00},
    {2.273310147516538037848476960789e+00, 0.000000000000000000000000000000e+00, 0.000000000000000000000000000000e+00, -1.053449546673724945833328092704e+01, -2.000872058224862470865446084645e+00, -1.795893186311879929917267872952e+01, 2.794888452941995993228374572936e+01, -2.858998277135023524664347860380e+00, -8.872856933530629319761828810442e+00, 1.236056717579430319631228485378e+01, 6.433927460157635724868896431872e-01, 0.000000000000000000000000000000e+00}}};

inline constexpr std::array<double, 12> b{
    5.429373411656876480257949424413e-02,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    4.450312892752409155150417063851e+00,
    1.891517899314500317231590997835e+00,
    -5.801203960010584914641640352784e+00,
    3.111643669578199045133715117117e-01,
    -1.521609496625160873328752586531e-01,
    2.013654008040303422522043774734e-01,
    4.471061572777258741329120539376e-02};

inline constexpr std::array<double, 13> e3{
    -1.898007540724076236404727069385e-01,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    4.450312892752409155150417063851e+00,
    1.891517899314500317231590997835e+00,
    -5.801203960010584914641640352784e+00,
    -4.226823213237919096840755628364e-01,
    -1.521609496625160873328752586531e-01,
    2.013654008040303422522043774734e-01,
    2.265179219836082127881304870698e-02,
    0.000000000000000000000000000000e+00};

inline constexpr std::array<double, 13> e5{
    1.312004499419488004474665387988e-02,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    0.000000000000000000000000000000e+00,
    -1.225156446376204355530603606894e+00,
    -4.957589496572502030247164839238e-01,
    1.664377182454986447979194963409e+00,
    -3.503288487499736647556858315511e-01,
    3.341791187130174756170220007334e-01,
    8.192320648511570990724095508995e-02,
    -2.235530786388629370664560269688e-02,
    0.000000000000000000000000000000e+00};
}  // namespace lrufilter::detail::dop853
