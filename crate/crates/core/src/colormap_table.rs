// Generated from the 256-entry viridis table, scaled to 16-bit channels.
pub(crate) const VIRIDIS_U16: [[u16; 3]; 256] = [
    [17498, 319, 21588],
    [17597, 629, 21982],
    [17691, 958, 22372],
    [17780, 1307, 22758],
    [17864, 1675, 23140],
    [17944, 2064, 23517],
    [18019, 2474, 23890],
    [18089, 2894, 24259],
    [18154, 3299, 24622],
    [18215, 3691, 24981],
    [18271, 4073, 25335],
    [18321, 4446, 25684],
    [18367, 4811, 26028],
    [18408, 5171, 26367],
    [18445, 5526, 26700],
    [18476, 5876, 27028],
    [18502, 6223, 27350],
    [18524, 6566, 27666],
    [18541, 6907, 27977],
    [18552, 7245, 28282],
    [18559, 7581, 28581],
    [18561, 7915, 28874],
    [18559, 8247, 29160],
    [18551, 8578, 29441],
    [18539, 8908, 29715],
    [18522, 9236, 29983],
    [18500, 9562, 30245],
    [18473, 9888, 30500],
    [18442, 10213, 30749],
    [18407, 10536, 30991],
    [18367, 10859, 31227],
    [18322, 11180, 31457],
    [18273, 11501, 31679],
    [18220, 11820, 31896],
    [18162, 12139, 32105],
    [18100, 12456, 32309],
    [18035, 12773, 32506],
    [17965, 13089, 32696],
    [17891, 13403, 32880],
    [17814, 13717, 33058],
    [17733, 14029, 33230],
    [17649, 14340, 33395],
    [17561, 14650, 33554],
    [17470, 14959, 33708],
    [17376, 15267, 33855],
    [17279, 15573, 33997],
    [17179, 15878, 34133],
    [17077, 16182, 34264],
    [16971, 16484, 34389],
    [16864, 16785, 34508],
    [16754, 17085, 34623],
    [16642, 17383, 34732],
    [16528, 17680, 34837],
    [16412, 17976, 34937],
    [16294, 18270, 35032],
    [16175, 18562, 35123],
    [16054, 18853, 35209],
    [15932, 19142, 35292],
    [15809, 19430, 35370],
    [15686, 19717, 35444],
    [15561, 20001, 35515],
    [15435, 20285, 35582],
    [15309, 20567, 35645],
    [15183, 20847, 35706],
    [15056, 21126, 35763],
    [14929, 21403, 35817],
    [14802, 21679, 35868],
    [14675, 21954, 35917],
    [14548, 22227, 35962],
    [14421, 22499, 36006],
    [14295, 22769, 36047],
    [14169, 23038, 36085],
    [14044, 23305, 36122],
    [13919, 23572, 36156],
    [13795, 23837, 36189],
    [13672, 24101, 36220],
    [13550, 24363, 36249],
    [13428, 24625, 36276],
    [13308, 24885, 36301],
    [13188, 25144, 36326],
    [13070, 25402, 36348],
    [12952, 25659, 36370],
    [12836, 25915, 36390],
    [12720, 26170, 36409],
    [12606, 26424, 36427],
    [12493, 26677, 36443],
    [12381, 26929, 36459],
    [12270, 27180, 36473],
    [12160, 27431, 36487],
    [12052, 27681, 36499],
    [11944, 27930, 36511],
    [11838, 28178, 36521],
    [11732, 28426, 36531],
    [11627, 28673, 36540],
    [11524, 28920, 36548],
    [11421, 29166, 36555],
    [11319, 29412, 36561],
    [11218, 29657, 36566],
    [11118, 29901, 36570],
    [11018, 30145, 36574],
    [10919, 30389, 36576],
    [10821, 30633, 36578],
    [10723, 30876, 36578],
    [10626, 31119, 36578],
    [10529, 31361, 36576],
    [10433, 31603, 36573],
    [10337, 31846, 36569],
    [10241, 32088, 36564],
    [10146, 32329, 36558],
    [10051, 32571, 36550],
    [9956, 32812, 36541],
    [9861, 33054, 36531],
    [9767, 33295, 36519],
    [9673, 33536, 36506],
    [9580, 33778, 36491],
    [9487, 34019, 36475],
    [9394, 34260, 36457],
    [9302, 34501, 36437],
    [9210, 34742, 36415],
    [9119, 34983, 36391],
    [9029, 35225, 36366],
    [8939, 35466, 36338],
    [8852, 35707, 36308],
    [8765, 35948, 36276],
    [8680, 36189, 36242],
    [8596, 36431, 36205],
    [8515, 36672, 36166],
    [8436, 36914, 36125],
    [8360, 37155, 36081],
    [8287, 37396, 36034],
    [8218, 37638, 35984],
    [8152, 37879, 35932],
    [8091, 38121, 35877],
    [8035, 38362, 35819],
    [7984, 38604, 35757],
    [7939, 38845, 35693],
    [7901, 39087, 35626],
    [7870, 39328, 35555],
    [7847, 39569, 35481],
    [7832, 39810, 35403],
    [7826, 40051, 35322],
    [7830, 40292, 35238],
    [7844, 40533, 35150],
    [7870, 40773, 35058],
    [7906, 41014, 34962],
    [7955, 41254, 34863],
    [8016, 41494, 34760],
    [8090, 41733, 34652],
    [8177, 41973, 34541],
    [8279, 42212, 34426],
    [8394, 42450, 34307],
    [8524, 42688, 34184],
    [8668, 42926, 34056],
    [8827, 43164, 33924],
    [9001, 43401, 33788],
    [9189, 43637, 33647],
    [9391, 43873, 33502],
    [9608, 44108, 33353],
    [9840, 44343, 33199],
    [10085, 44577, 33041],
    [10345, 44811, 32878],
    [10618, 45043, 32710],
    [10904, 45275, 32538],
    [11203, 45506, 32361],
    [11515, 45737, 32180],
    [11839, 45966, 31993],
    [12175, 46195, 31802],
    [12523, 46423, 31606],
    [12882, 46650, 31406],
    [13252, 46875, 31200],
    [13633, 47100, 30990],
    [14024, 47324, 30774],
    [14426, 47546, 30554],
    [14837, 47768, 30329],
    [15258, 47988, 30099],
    [15687, 48207, 29864],
    [16126, 48424, 29623],
    [16574, 48641, 29378],
    [17030, 48856, 29128],
    [17494, 49069, 28873],
    [17966, 49282, 28613],
    [18447, 49492, 28347],
    [18934, 49701, 28077],
    [19430, 49909, 27801],
    [19932, 50115, 27521],
    [20442, 50319, 27235],
    [20959, 50522, 26945],
    [21482, 50723, 26649],
    [22012, 50922, 26348],
    [22549, 51119, 26042],
    [23092, 51315, 25731],
    [23641, 51508, 25415],
    [24196, 51700, 25094],
    [24758, 51889, 24768],
    [25325, 52077, 24437],
    [25898, 52263, 24101],
    [26476, 52446, 23760],
    [27060, 52627, 23414],
    [27650, 52806, 23062],
    [28244, 52983, 22706],
    [28844, 53158, 22345],
    [29449, 53330, 21979],
    [30059, 53500, 21609],
    [30674, 53668, 21233],
    [31293, 53833, 20853],
    [31917, 53996, 20468],
    [32546, 54157, 20078],
    [33178, 54314, 19684],
    [33816, 54470, 19286],
    [34457, 54623, 18882],
    [35102, 54773, 18475],
    [35751, 54921, 18063],
    [36404, 55066, 17647],
    [37060, 55209, 17228],
    [37720, 55349, 16804],
    [38382, 55486, 16377],
    [39048, 55621, 15947],
    [39717, 55753, 15513],
    [40389, 55882, 15076],
    [41063, 56009, 14637],
    [41739, 56133, 14196],
    [42418, 56255, 13753],
    [43099, 56374, 13309],
    [43781, 56491, 12864],
    [44465, 56605, 12419],
    [45150, 56717, 11975],
    [45836, 56827, 11532],
    [46523, 56934, 11092],
    [47211, 57038, 10656],
    [47899, 57141, 10225],
    [48587, 57241, 9801],
    [49275, 57340, 9386],
    [49962, 57436, 8982],
    [50649, 57531, 8592],
    [51335, 57624, 8218],
    [52019, 57715, 7865],
    [52702, 57805, 7534],
    [53383, 57893, 7232],
    [54062, 57980, 6961],
    [54739, 58066, 6727],
    [55414, 58151, 6534],
    [56086, 58234, 6387],
    [56754, 58317, 6288],
    [57420, 58400, 6242],
    [58082, 58482, 6250],
    [58740, 58563, 6313],
    [59395, 58644, 6431],
    [60046, 58725, 6600],
    [60692, 58807, 6820],
    [61334, 58888, 7086],
    [61972, 58969, 7395],
    [62606, 59051, 7742],
    [63234, 59134, 8122],
    [63858, 59217, 8534],
    [64478, 59300, 8972],
    [65093, 59385, 9433],
];
