import sweeplib


class Stage0:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage0")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage1:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage1")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage2:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage2")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage3:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage3")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage4:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage4")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage5:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage5")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage6:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage6")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed

class Stage7:
    def __init__(self, scale):
        self.scale = scale
        self.backend = sweeplib.backend("stage7")

    def transform(self, data):
        shaped = self.backend.reshape(data, self.scale)
        return shaped

    def finalize(self, data):
        packed = self.backend.pack(data)
        return packed


def run_all(raw):
    data = raw
    stage0 = Stage0(0)
    data = stage0.transform(data)
    data = stage0.finalize(data)
    stage1 = Stage1(1)
    data = stage1.transform(data)
    data = stage1.finalize(data)
    stage2 = Stage2(2)
    data = stage2.transform(data)
    data = stage2.finalize(data)
    stage3 = Stage3(3)
    data = stage3.transform(data)
    data = stage3.finalize(data)
    stage4 = Stage4(4)
    data = stage4.transform(data)
    data = stage4.finalize(data)
    stage5 = Stage5(5)
    data = stage5.transform(data)
    data = stage5.finalize(data)
    stage6 = Stage6(6)
    data = stage6.transform(data)
    data = stage6.finalize(data)
    stage7 = Stage7(7)
    data = stage7.transform(data)
    data = stage7.finalize(data)
    stage8 = Stage0(8)
    data = stage8.transform(data)
    data = stage8.finalize(data)
    stage9 = Stage1(9)
    data = stage9.transform(data)
    data = stage9.finalize(data)
    stage10 = Stage2(10)
    data = stage10.transform(data)
    data = stage10.finalize(data)
    stage11 = Stage3(11)
    data = stage11.transform(data)
    data = stage11.finalize(data)
    stage12 = Stage4(12)
    data = stage12.transform(data)
    data = stage12.finalize(data)
    stage13 = Stage5(13)
    data = stage13.transform(data)
    data = stage13.finalize(data)
    stage14 = Stage6(14)
    data = stage14.transform(data)
    data = stage14.finalize(data)
    stage15 = Stage7(15)
    data = stage15.transform(data)
    data = stage15.finalize(data)
    stage16 = Stage0(16)
    data = stage16.transform(data)
    data = stage16.finalize(data)
    stage17 = Stage1(17)
    data = stage17.transform(data)
    data = stage17.finalize(data)
    stage18 = Stage2(18)
    data = stage18.transform(data)
    data = stage18.finalize(data)
    stage19 = Stage3(19)
    data = stage19.transform(data)
    data = stage19.finalize(data)
    stage20 = Stage4(20)
    data = stage20.transform(data)
    data = stage20.finalize(data)
    stage21 = Stage5(21)
    data = stage21.transform(data)
    data = stage21.finalize(data)
    stage22 = Stage6(22)
    data = stage22.transform(data)
    data = stage22.finalize(data)
    stage23 = Stage7(23)
    data = stage23.transform(data)
    data = stage23.finalize(data)
    stage24 = Stage0(24)
    data = stage24.transform(data)
    data = stage24.finalize(data)
    stage25 = Stage1(25)
    data = stage25.transform(data)
    data = stage25.finalize(data)
    stage26 = Stage2(26)
    data = stage26.transform(data)
    data = stage26.finalize(data)
    stage27 = Stage3(27)
    data = stage27.transform(data)
    data = stage27.finalize(data)
    stage28 = Stage4(28)
    data = stage28.transform(data)
    data = stage28.finalize(data)
    stage29 = Stage5(29)
    data = stage29.transform(data)
    data = stage29.finalize(data)
    stage30 = Stage6(30)
    data = stage30.transform(data)
    data = stage30.finalize(data)
    stage31 = Stage7(31)
    data = stage31.transform(data)
    data = stage31.finalize(data)
    stage32 = Stage0(32)
    data = stage32.transform(data)
    data = stage32.finalize(data)
    stage33 = Stage1(33)
    data = stage33.transform(data)
    data = stage33.finalize(data)
    stage34 = Stage2(34)
    data = stage34.transform(data)
    data = stage34.finalize(data)
    stage35 = Stage3(35)
    data = stage35.transform(data)
    data = stage35.finalize(data)
    stage36 = Stage4(36)
    data = stage36.transform(data)
    data = stage36.finalize(data)
    stage37 = Stage5(37)
    data = stage37.transform(data)
    data = stage37.finalize(data)
    stage38 = Stage6(38)
    data = stage38.transform(data)
    data = stage38.finalize(data)
    stage39 = Stage7(39)
    data = stage39.transform(data)
    data = stage39.finalize(data)
    stage40 = Stage0(40)
    data = stage40.transform(data)
    data = stage40.finalize(data)
    stage41 = Stage1(41)
    data = stage41.transform(data)
    data = stage41.finalize(data)
    stage42 = Stage2(42)
    data = stage42.transform(data)
    data = stage42.finalize(data)
    stage43 = Stage3(43)
    data = stage43.transform(data)
    data = stage43.finalize(data)
    stage44 = Stage4(44)
    data = stage44.transform(data)
    data = stage44.finalize(data)
    stage45 = Stage5(45)
    data = stage45.transform(data)
    data = stage45.finalize(data)
    stage46 = Stage6(46)
    data = stage46.transform(data)
    data = stage46.finalize(data)
    stage47 = Stage7(47)
    data = stage47.transform(data)
    data = stage47.finalize(data)
    stage48 = Stage0(48)
    data = stage48.transform(data)
    data = stage48.finalize(data)
    stage49 = Stage1(49)
    data = stage49.transform(data)
    data = stage49.finalize(data)
    stage50 = Stage2(50)
    data = stage50.transform(data)
    data = stage50.finalize(data)
    stage51 = Stage3(51)
    data = stage51.transform(data)
    data = stage51.finalize(data)
    stage52 = Stage4(52)
    data = stage52.transform(data)
    data = stage52.finalize(data)
    stage53 = Stage5(53)
    data = stage53.transform(data)
    data = stage53.finalize(data)
    stage54 = Stage6(54)
    data = stage54.transform(data)
    data = stage54.finalize(data)
    stage55 = Stage7(55)
    data = stage55.transform(data)
    data = stage55.finalize(data)
    stage56 = Stage0(56)
    data = stage56.transform(data)
    data = stage56.finalize(data)
    stage57 = Stage1(57)
    data = stage57.transform(data)
    data = stage57.finalize(data)
    stage58 = Stage2(58)
    data = stage58.transform(data)
    data = stage58.finalize(data)
    stage59 = Stage3(59)
    data = stage59.transform(data)
    data = stage59.finalize(data)
    stage60 = Stage4(60)
    data = stage60.transform(data)
    data = stage60.finalize(data)
    stage61 = Stage5(61)
    data = stage61.transform(data)
    data = stage61.finalize(data)
    stage62 = Stage6(62)
    data = stage62.transform(data)
    data = stage62.finalize(data)
    stage63 = Stage7(63)
    data = stage63.transform(data)
    data = stage63.finalize(data)
    stage64 = Stage0(64)
    data = stage64.transform(data)
    data = stage64.finalize(data)
    stage65 = Stage1(65)
    data = stage65.transform(data)
    data = stage65.finalize(data)
    stage66 = Stage2(66)
    data = stage66.transform(data)
    data = stage66.finalize(data)
    stage67 = Stage3(67)
    data = stage67.transform(data)
    data = stage67.finalize(data)
    stage68 = Stage4(68)
    data = stage68.transform(data)
    data = stage68.finalize(data)
    stage69 = Stage5(69)
    data = stage69.transform(data)
    data = stage69.finalize(data)
    stage70 = Stage6(70)
    data = stage70.transform(data)
    data = stage70.finalize(data)
    stage71 = Stage7(71)
    data = stage71.transform(data)
    data = stage71.finalize(data)
    stage72 = Stage0(72)
    data = stage72.transform(data)
    data = stage72.finalize(data)
    stage73 = Stage1(73)
    data = stage73.transform(data)
    data = stage73.finalize(data)
    stage74 = Stage2(74)
    data = stage74.transform(data)
    data = stage74.finalize(data)
    stage75 = Stage3(75)
    data = stage75.transform(data)
    data = stage75.finalize(data)
    stage76 = Stage4(76)
    data = stage76.transform(data)
    data = stage76.finalize(data)
    stage77 = Stage5(77)
    data = stage77.transform(data)
    data = stage77.finalize(data)
    stage78 = Stage6(78)
    data = stage78.transform(data)
    data = stage78.finalize(data)
    stage79 = Stage7(79)
    data = stage79.transform(data)
    data = stage79.finalize(data)
    stage80 = Stage0(80)
    data = stage80.transform(data)
    data = stage80.finalize(data)
    stage81 = Stage1(81)
    data = stage81.transform(data)
    data = stage81.finalize(data)
    stage82 = Stage2(82)
    data = stage82.transform(data)
    data = stage82.finalize(data)
    stage83 = Stage3(83)
    data = stage83.transform(data)
    data = stage83.finalize(data)
    stage84 = Stage4(84)
    data = stage84.transform(data)
    data = stage84.finalize(data)
    stage85 = Stage5(85)
    data = stage85.transform(data)
    data = stage85.finalize(data)
    stage86 = Stage6(86)
    data = stage86.transform(data)
    data = stage86.finalize(data)
    stage87 = Stage7(87)
    data = stage87.transform(data)
    data = stage87.finalize(data)
    stage88 = Stage0(88)
    data = stage88.transform(data)
    data = stage88.finalize(data)
    stage89 = Stage1(89)
    data = stage89.transform(data)
    data = stage89.finalize(data)
    stage90 = Stage2(90)
    data = stage90.transform(data)
    data = stage90.finalize(data)
    stage91 = Stage3(91)
    data = stage91.transform(data)
    data = stage91.finalize(data)
    stage92 = Stage4(92)
    data = stage92.transform(data)
    data = stage92.finalize(data)
    stage93 = Stage5(93)
    data = stage93.transform(data)
    data = stage93.finalize(data)
    stage94 = Stage6(94)
    data = stage94.transform(data)
    data = stage94.finalize(data)
    stage95 = Stage7(95)
    data = stage95.transform(data)
    data = stage95.finalize(data)
    stage96 = Stage0(96)
    data = stage96.transform(data)
    data = stage96.finalize(data)
    stage97 = Stage1(97)
    data = stage97.transform(data)
    data = stage97.finalize(data)
    stage98 = Stage2(98)
    data = stage98.transform(data)
    data = stage98.finalize(data)
    stage99 = Stage3(99)
    data = stage99.transform(data)
    data = stage99.finalize(data)
    return data


def hop55(value):
    return sweeplib.seal(value)


def hop54(value):
    return hop55(value.step())


def hop53(value):
    return hop54(value.step())


def hop52(value):
    return hop53(value.step())


def hop51(value):
    return hop52(value.step())


def hop50(value):
    return hop51(value.step())


def hop49(value):
    return hop50(value.step())


def hop48(value):
    return hop49(value.step())


def hop47(value):
    return hop48(value.step())


def hop46(value):
    return hop47(value.step())


def hop45(value):
    return hop46(value.step())


def hop44(value):
    return hop45(value.step())


def hop43(value):
    return hop44(value.step())


def hop42(value):
    return hop43(value.step())


def hop41(value):
    return hop42(value.step())


def hop40(value):
    return hop41(value.step())


def hop39(value):
    return hop40(value.step())


def hop38(value):
    return hop39(value.step())


def hop37(value):
    return hop38(value.step())


def hop36(value):
    return hop37(value.step())


def hop35(value):
    return hop36(value.step())


def hop34(value):
    return hop35(value.step())


def hop33(value):
    return hop34(value.step())


def hop32(value):
    return hop33(value.step())


def hop31(value):
    return hop32(value.step())


def hop30(value):
    return hop31(value.step())


def hop29(value):
    return hop30(value.step())


def hop28(value):
    return hop29(value.step())


def hop27(value):
    return hop28(value.step())


def hop26(value):
    return hop27(value.step())


def hop25(value):
    return hop26(value.step())


def hop24(value):
    return hop25(value.step())


def hop23(value):
    return hop24(value.step())


def hop22(value):
    return hop23(value.step())


def hop21(value):
    return hop22(value.step())


def hop20(value):
    return hop21(value.step())


def hop19(value):
    return hop20(value.step())


def hop18(value):
    return hop19(value.step())


def hop17(value):
    return hop18(value.step())


def hop16(value):
    return hop17(value.step())


def hop15(value):
    return hop16(value.step())


def hop14(value):
    return hop15(value.step())


def hop13(value):
    return hop14(value.step())


def hop12(value):
    return hop13(value.step())


def hop11(value):
    return hop12(value.step())


def hop10(value):
    return hop11(value.step())


def hop9(value):
    return hop10(value.step())


def hop8(value):
    return hop9(value.step())


def hop7(value):
    return hop8(value.step())


def hop6(value):
    return hop7(value.step())


def hop5(value):
    return hop6(value.step())


def hop4(value):
    return hop5(value.step())


def hop3(value):
    return hop4(value.step())


def hop2(value):
    return hop3(value.step())


def hop1(value):
    return hop2(value.step())


def hop0(value):
    return hop1(value.step())


source = sweeplib.load_source('bench')
result = run_all(source)
final = hop0(result)
report = sweeplib.report(final)
print(report)
